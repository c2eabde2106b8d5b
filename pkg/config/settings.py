"""
Django settings for the GraphRecover project.

Generated by 'django-admin startproject' using Django 4.2.7 and trimmed to
what a command-line numerical project needs: no web stack, a small sqlite
database for the experiment audit log, Celery for trial fan-out and the
recovery tunables.

For more information on this file, see
https://docs.djangoproject.com/en/4.2/topics/settings/
"""

from pathlib import Path
import logging
import sys
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

logger = logging.getLogger(__name__)

# AIDEV-NOTE: dataset-dir-config; Catalog datasets are resolved as DATASET_DIR/<name>.mtx
DATASET_DIR = BASE_DIR / config('DATASET_DIR', default='datasets')

# No request handling happens here, but Django still wants a key
SECRET_KEY = config('SECRET_KEY', default='graphrecover-local-key')

DEBUG = config('DEBUG', default=False, cast=bool)

# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    # Third-party apps
    "rest_framework",
    # GraphRecover apps
    "graph_core",
    "io_formats",
    "recovery",
    "spectral",
    "param_select",
    "lwce_bound",
    "experiments",
    "cli",
]


# Database
# https://docs.djangoproject.com/en/4.2/ref/settings/#databases

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / config('DATABASE_NAME', default='db.sqlite3'),
    }
}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Recovery configuration
# AIDEV-NOTE: dense-limit; Every eigendecomposition is dense, N above this is refused
GRAPH_DENSE_VERTEX_LIMIT = config('GRAPH_DENSE_VERTEX_LIMIT', default=5000, cast=int)
LAPLACIAN_CACHE_TIMEOUT = config('LAPLACIAN_CACHE_TIMEOUT', default=3600, cast=int)

# Global parameter selection: seed grid, verification grid and its acceptance band
GLOBAL_SEED_GRID_SIZE = config('GLOBAL_SEED_GRID_SIZE', default=64, cast=int)
GLOBAL_VERIFY_GRID_SIZE = config('GLOBAL_VERIFY_GRID_SIZE', default=200, cast=int)
GLOBAL_VERIFY_TOLERANCE = config('GLOBAL_VERIFY_TOLERANCE', default=0.005, cast=float)
# Solution-independent cross-check grid: lambda_max(Q^* Q) * 10^[-decades, decades] per multiplier
GLOBAL_WIDE_GRID_SIZE = config('GLOBAL_WIDE_GRID_SIZE', default=40, cast=int)
GLOBAL_WIDE_GRID_DECADES = config('GLOBAL_WIDE_GRID_DECADES', default=6.0, cast=float)
GLOBAL_FEASIBILITY_CAP = config('GLOBAL_FEASIBILITY_CAP', default=1e12, cast=float)

# Local worst-case error bound search
LWCE_GRID_SIZE = config('LWCE_GRID_SIZE', default=40, cast=int)
LWCE_REFINE_SWEEPS = config('LWCE_REFINE_SWEEPS', default=20, cast=int)
LWCE_MULTIPLIER_MIN = config('LWCE_MULTIPLIER_MIN', default=1e-6, cast=float)
LWCE_MULTIPLIER_MAX = config('LWCE_MULTIPLIER_MAX', default=1e6, cast=float)

EXPERIMENT_DEFAULT_TRIALS = config('EXPERIMENT_DEFAULT_TRIALS', default=10, cast=int)


# AIDEV-NOTE: logs-dir-creation; Create logs directory if it doesn't exist
LOGS_DIR = BASE_DIR / 'logs'
try:
    LOGS_DIR.mkdir(mode=0o750, exist_ok=True)
except OSError as e:
    print(f'ERROR: Cannot create logs directory at {LOGS_DIR}: {e} [SETTINGS-LOGS01]', file=sys.stderr)
    raise RuntimeError(f'Failed to create logs directory: {e}') from e

# Logging configuration with grepable codes
# AIDEV-NOTE: logging-codes; All log statements must include unique grepable codes [SETTINGS-LOG01]
# Console output goes to stderr so command results on stdout stay clean
_APP_LOGGERS = [
    "graph_core",
    "io_formats",
    "recovery",
    "spectral",
    "param_select",
    "lwce_bound",
    "experiments",
    "cli",
]

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {module} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
            "stream": "ext://sys.stderr",
            "level": config('CONSOLE_LOG_LEVEL', default='WARNING'),
        },
        "file": {
            "class": "logging.FileHandler",
            "filename": LOGS_DIR / "graphrecover.log",
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console", "file"],
        "level": "INFO",
    },
    "loggers": {
        name: {
            "handlers": ["console", "file"],
            "level": config('APP_LOG_LEVEL', default='INFO'),
            "propagate": False,
        }
        for name in _APP_LOGGERS
    },
}

# Celery Configuration
# AIDEV-NOTE: celery-config; Trials run eagerly in-process unless a worker is deployed
CELERY_BROKER_URL = config("CELERY_BROKER_URL", default="redis://localhost:6379/0")
CELERY_RESULT_BACKEND = config("CELERY_RESULT_BACKEND", default="redis://localhost:6379/0")
CELERY_TASK_ALWAYS_EAGER = config("CELERY_TASK_ALWAYS_EAGER", default=True, cast=bool)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_TIMEZONE = "UTC"
CELERY_ENABLE_UTC = True
CELERY_TASK_TRACK_STARTED = True
CELERY_TASK_TIME_LIMIT = 60 * 60  # 1 hour
CELERY_TASK_SOFT_TIME_LIMIT = 55 * 60

# Django Cache Configuration
# AIDEV-NOTE: cache-config; Laplacian bundles are cached; Redis only when REDIS_URL is set
REDIS_URL = config("REDIS_URL", default="")
if REDIS_URL:
    CACHES = {
        "default": {
            "BACKEND": "django_redis.cache.RedisCache",
            "LOCATION": REDIS_URL,
            "OPTIONS": {
                "CLIENT_CLASS": "django_redis.client.DefaultClient",
            },
            "KEY_PREFIX": "graphrecover",
            "TIMEOUT": LAPLACIAN_CACHE_TIMEOUT,
        }
    }
else:
    CACHES = {
        "default": {
            "BACKEND": "django.core.cache.backends.locmem.LocMemCache",
            "LOCATION": "graphrecover-cache",
            "TIMEOUT": LAPLACIAN_CACHE_TIMEOUT,
        }
    }

if DEBUG:
    logger.warning('DEBUG mode is enabled [SETTINGS-DEBUG01]')
