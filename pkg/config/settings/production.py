"""
Production settings

Used when Monte Carlo studies run on a shared machine and archive their
reports to PostgreSQL.
"""

from .base import *
import dj_database_url
import os

DEBUG = False

# Parse DATABASE_URL from environment
DATABASES = {
    'default': dj_database_url.config(
        default=os.environ.get('DATABASE_URL'),
        conn_max_age=600,
        conn_health_checks=True,
    )
}

LOGGING['loggers']['apps']['level'] = env('LOG_LEVEL', default='WARNING')
