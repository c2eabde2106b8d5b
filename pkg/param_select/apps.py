from django.apps import AppConfig


class ParamSelectConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "param_select"
