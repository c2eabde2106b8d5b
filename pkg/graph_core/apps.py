from django.apps import AppConfig


class GraphCoreConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "graph_core"
