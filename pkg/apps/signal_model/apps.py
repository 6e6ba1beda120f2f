from django.apps import AppConfig


class SignalModelConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.signal_model'
