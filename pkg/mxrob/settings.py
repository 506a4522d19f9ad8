from pathlib import Path
import os

import dj_database_url
from dotenv import load_dotenv


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Optional .env next to manage.py; real environment variables win.
load_dotenv(BASE_DIR / ".env", override=False)


def _env_bool(name: str, default: str) -> bool:
    return os.environ.get(name, default).strip().lower() in {"1", "true", "yes", "on"}


# ---------------------------------------------------------------------
# Core
# ---------------------------------------------------------------------

# Only used by Django internals (no sessions / no web surface).
SECRET_KEY = os.environ.get(
    "SECRET_KEY",
    "mxrob-dev-only-change-me"
)

DEBUG = _env_bool("DEBUG", "1")

ALLOWED_HOSTS: list[str] = []


# ---------------------------------------------------------------------
# Application definition
# ---------------------------------------------------------------------

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "robustness",
]

MIDDLEWARE: list[str] = []


# ---------------------------------------------------------------------
# Database
# ---------------------------------------------------------------------
# Run records go to DATABASE_URL when given (e.g. PostgreSQL on a shared
# cluster). Local default: sqlite next to manage.py.
DATABASE_URL = os.environ.get("DATABASE_URL", "").strip()

if DATABASE_URL:
    DATABASES = {
        "default": dj_database_url.config(
            default=DATABASE_URL,
            conn_max_age=600,
        )
    }
else:
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.sqlite3",
            "NAME": BASE_DIR / "db.sqlite3",
        }
    }

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# ---------------------------------------------------------------------
# Internationalization
# ---------------------------------------------------------------------

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True


# ---------------------------------------------------------------------
# Experiment defaults
# ---------------------------------------------------------------------
# Every value can be overridden per run by a preset, a --config file or a
# CLI flag (in that order).

MXROB = {
    "DEFAULT_RUNS": int(os.environ.get("MXROB_DEFAULT_RUNS", "50")),
    "GRID_STEP": float(os.environ.get("MXROB_GRID_STEP", "0.02")),
    "FINE_GRID_STEP": float(os.environ.get("MXROB_FINE_GRID_STEP", "0.01")),
    "WORKERS": int(os.environ.get("MXROB_WORKERS", "1")),
    "OUTPUT_DIR": os.environ.get("MXROB_OUTPUT_DIR", str(BASE_DIR / "output")),
    "EMPIRICAL_INSTANCES": int(os.environ.get("MXROB_EMPIRICAL_INSTANCES", "10")),
    "PERSIST_RUNS": _env_bool("MXROB_PERSIST_RUNS", "1"),
}


# ---------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------

LOG_LEVEL = os.environ.get("MXROB_LOG_LEVEL", "INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
    },
    "loggers": {
        "robustness": {
            "handlers": ["console"],
            "level": LOG_LEVEL,
            "propagate": False,
        },
    },
}
