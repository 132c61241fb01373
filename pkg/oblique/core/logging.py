import logging
import logging.config
from typing import Optional

from oblique.core.config import settings


LOG_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """Install the console handler on the package logger."""
    logging.config.dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {"generic": {"format": LOG_FORMAT}},
            "handlers": {
                "console": {
                    "class": "logging.StreamHandler",
                    "stream": "ext://sys.stderr",
                    "formatter": "generic",
                }
            },
            "loggers": {
                "oblique": {
                    "level": (level or settings.LOG_LEVEL).upper(),
                    "handlers": ["console"],
                    "propagate": False,
                }
            },
        }
    )
