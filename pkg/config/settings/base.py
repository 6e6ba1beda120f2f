"""
Django settings for the inertial_array project.
Base settings shared across all environments.

This file contains the core configuration for the Django project, including
installed apps, logging, and the numerical defaults used by the estimator,
the Cramer-Rao bound tools and the Monte Carlo harness.
"""

from pathlib import Path
import environ

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# Initialize environment variables
env = environ.Env(
    DEBUG=(bool, False)
)

# Read .env file if it exists
environ.Env.read_env(BASE_DIR / '.env')

# Not used for any web session; Django still requires one.
SECRET_KEY = env('SECRET_KEY', default='django-insecure-temporary-key-change-in-production')

DEBUG = env('DEBUG')

ALLOWED_HOSTS = env.list('ALLOWED_HOSTS', default=[])

# Application definition
INSTALLED_APPS = [
    # Local apps (modular architecture)
    'apps.core',             # Shared utilities, CLI base, exceptions
    'apps.geometry',         # Array layout & identifiability
    'apps.signal_model',     # Forward model & simulation
    'apps.estimator',        # Maximum likelihood fusion
    'apps.crb',              # Cramer-Rao bounds
    'apps.tensor_baseline',  # Angular acceleration tensor method
    'apps.montecarlo',       # Accuracy studies & report archive
]

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'apps': {
            'handlers': ['console'],
            'level': env('LOG_LEVEL', default='INFO'),
            'propagate': False,
        },
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
        },
    },
}

# Numerical defaults (all overridable from .env)
INERTIAL_ARRAY = {
    # Accelerometer noise: 0.01 read as a variance in (m/s^2)^2 unless 'std'
    'ACCEL_NOISE': env.float('ACCEL_NOISE', default=0.01),
    'ACCEL_NOISE_INTERPRETATION': env('ACCEL_NOISE_INTERPRETATION', default='variance'),
    'GYRO_NOISE_STD_DPS': env.float('GYRO_NOISE_STD_DPS', default=1.0),
    'GYRO_SATURATION_DPS': env.float('GYRO_SATURATION_DPS', default=2000.0),

    # Gauss-Newton
    'SOLVER_MAX_ITERATIONS': env.int('SOLVER_MAX_ITERATIONS', default=50),
    'SOLVER_STEP_TOLERANCE': env.float('SOLVER_STEP_TOLERANCE', default=1e-10),
    'SOLVER_COST_TOLERANCE': env.float('SOLVER_COST_TOLERANCE', default=1e-12),
    'SOLVER_LINE_SEARCH_HALVINGS': env.int('SOLVER_LINE_SEARCH_HALVINGS', default=20),

    # Relative singular value threshold for numerical rank
    'RANK_TOLERANCE': env.float('RANK_TOLERANCE', default=1e-10),

    # Multi-start seeds when every gyro channel of an axis is clipped
    'SATURATED_GRID_SIZE': env.int('SATURATED_GRID_SIZE', default=8),
    'SATURATED_GRID_SPAN': env.float('SATURATED_GRID_SPAN', default=10.0),

    # Monte Carlo
    'MC_DEFAULT_RUNS': env.int('MC_DEFAULT_RUNS', default=10_000),
    'MC_DEFAULT_SEED': env.int('MC_DEFAULT_SEED', default=0),
    'MC_DEFAULT_THREADS': env.int('MC_DEFAULT_THREADS', default=1),

    # Angular unit at the file/CLI boundary
    'DEFAULT_UNITS': env('DEFAULT_UNITS', default='deg'),
}
