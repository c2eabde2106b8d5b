from django.db import models
import logging

logger = logging.getLogger(__name__)


class ExperimentRun(models.Model):
    """
    Audit log for experiment runs.

    AIDEV-NOTE: audit-trail; One row per CLI experiment run, successful or not
    """
    dataset = models.CharField(max_length=1024, db_index=True)
    config = models.JSONField(default=dict)
    num_rows = models.IntegerField(default=0)
    num_trials = models.IntegerField(default=0)
    output_path = models.CharField(max_length=1024, blank=True)
    success = models.BooleanField(default=True, db_index=True)
    error_message = models.TextField(blank=True)
    execution_time_ms = models.IntegerField(default=0)
    timestamp = models.DateTimeField(auto_now_add=True, db_index=True)

    class Meta:
        verbose_name = "Experiment Run"
        verbose_name_plural = "Experiment Runs"
        ordering = ['-timestamp']
        indexes = [
            models.Index(fields=['-timestamp', 'dataset'], name='experiments_timesta_5c1f2e_idx'),
            models.Index(fields=['success', '-timestamp'], name='experiments_success_8a7d3b_idx'),
        ]

    def __str__(self):
        status = "ok" if self.success else "failed"
        return f"{self.dataset} ({self.num_rows} rows, {status}) at {self.timestamp}"

    @classmethod
    def log_run(cls, dataset, config=None, num_rows=0, num_trials=0, output_path='',
                success=True, error_message='', execution_time_ms=0):
        """
        Create a new run log entry.

        Returns the created ExperimentRun, or None when the audit write fails.
        """
        try:
            run = cls.objects.create(
                dataset=dataset,
                config=config or {},
                num_rows=num_rows,
                num_trials=num_trials,
                output_path=output_path,
                success=success,
                error_message=error_message,
                execution_time_ms=execution_time_ms,
            )

            log_level = logging.INFO if success else logging.ERROR
            logger.log(log_level, f'Experiment on {dataset} {"succeeded" if success else "failed"} [EXPRUN-LOG01]')
            return run
        except Exception as e:
            logger.error(f'Failed to log experiment run: {str(e)} [EXPRUN-LOG02]')
            # audit failures never fail the run
            return None
