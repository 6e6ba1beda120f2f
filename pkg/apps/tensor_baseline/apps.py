from django.apps import AppConfig


class TensorBaselineConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.tensor_baseline'
