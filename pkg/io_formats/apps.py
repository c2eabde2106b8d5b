from django.apps import AppConfig


class IoFormatsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "io_formats"
