import os
from pathlib import Path
import environ

# Initialize environment variables
env = environ.Env(
    # Set default values
    DEBUG=(bool, False),
    SECRET_KEY=(str, 'fakeguard-local-only-key'),
    LOG_LEVEL=(str, 'INFO'),
    FAKEGUARD_SEED=(int, 7),
    FAKEGUARD_OUT_DIR=(str, 'artifacts'),
    FAKEGUARD_WORKERS=(int, 1),
    FAKEGUARD_RUNS=(int, 10),
)

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent.parent

# Take environment variables from .env file if it exists
environ.Env.read_env(os.path.join(BASE_DIR, '.env'))

SECRET_KEY = env('SECRET_KEY')

DEBUG = env('DEBUG')

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',

    # Third-party apps
    'rest_framework',

    # Local apps
    'core',
    'taskgen',
    'features',
    'sofm',
    'deepnn',
    'pipeline',
    'cli',
]

# The experiment tooling never touches the database; sqlite keeps Django's
# checks satisfied.
DATABASES = {
    'default': env.db('DATABASE_URL', default='sqlite:///:memory:'),
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Logging
LOG_LEVEL = env('LOG_LEVEL')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'structured': {
            '()': 'core.logging.StructuredFormatter',
            'format': '%(asctime)s %(levelname)s %(name)s %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'structured',
        },
    },
    'loggers': {
        'fakeguard': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Experiment defaults. Command-line flags and --config files override these.
FAKEGUARD = {
    'SEED': env('FAKEGUARD_SEED'),
    'OUT_DIR': env('FAKEGUARD_OUT_DIR'),
    'WORKERS': env('FAKEGUARD_WORKERS'),
    'RUNS': env('FAKEGUARD_RUNS'),
    'GENERATION': {
        'total_tasks': 14306,
        'fake_fraction': 0.124,
        'num_days': 6,
        'center': (48.4758, -81.3305),
        'half_side_m': 5000.0,
        'grid_cell_m': 1000.0,
        'attack_zone_count': 5,
        'attack_zone_radius_m': 200.0,
    },
    'SPLIT': {
        'train_fraction': 0.8,
    },
    'FEATURES': {
        'top_k': 4,
        'relieff_k': 10,
        'relieff_samples': None,
        'selection': 'relieff',
        'indices': None,
    },
    'SOFM': {
        'rows': 4,
        'cols': 4,
        'epochs': 200,
        'alpha0': 0.5,
        'sigma0': 2.0,
        'alpha_min': 0.01,
        'sigma_min': 0.5,
        'purity_threshold': 1.0,
    },
    'TRAINING': {
        'epochs': 300,
        'batch_size': 32,
        'learning_rate': 0.01,
        'momentum': 0.9,
        'patience': 30,
        'threshold': 0.5,
        'hidden_layers': [15, 15, 15, 15],
    },
}
