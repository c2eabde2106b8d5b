from django.apps import AppConfig


class LwceBoundConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "lwce_bound"
