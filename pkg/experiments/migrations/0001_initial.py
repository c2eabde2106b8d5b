# Generated by Django 4.2.7 on 2026-10-18 12:00

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("dataset", models.CharField(db_index=True, max_length=1024)),
                ("config", models.JSONField(default=dict)),
                ("num_rows", models.IntegerField(default=0)),
                ("num_trials", models.IntegerField(default=0)),
                ("output_path", models.CharField(blank=True, max_length=1024)),
                ("success", models.BooleanField(db_index=True, default=True)),
                ("error_message", models.TextField(blank=True)),
                ("execution_time_ms", models.IntegerField(default=0)),
                ("timestamp", models.DateTimeField(auto_now_add=True, db_index=True)),
            ],
            options={
                "verbose_name": "Experiment Run",
                "verbose_name_plural": "Experiment Runs",
                "ordering": ["-timestamp"],
            },
        ),
        migrations.AddIndex(
            model_name="experimentrun",
            index=models.Index(fields=["-timestamp", "dataset"], name="experiments_timesta_5c1f2e_idx"),
        ),
        migrations.AddIndex(
            model_name="experimentrun",
            index=models.Index(fields=["success", "-timestamp"], name="experiments_success_8a7d3b_idx"),
        ),
    ]
