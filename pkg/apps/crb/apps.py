from django.apps import AppConfig


class CrbConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.crb'
    verbose_name = 'Cramer-Rao bounds'
