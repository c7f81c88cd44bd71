import logging
import sys
from typing import Optional

from app.core.exceptions import InvalidParameterError

# Set up logging formatter
formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

def get_logger(name: str, level: Optional[int] = None) -> logging.Logger:
    if level is None:
        level = logging.INFO

    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Avoid adding handlers if they already exist
    if not logger.handlers:
        # stdout carries command output (JSON summaries), logs go to stderr
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    # Disable propagation to parent loggers
    logger.propagate = False

    return logger


def set_package_level(level: str | int) -> None:
    """Apply one level to every logger created through get_logger under `app`."""
    resolved = logging.getLevelName(level.upper()) if isinstance(level, str) else level
    if not isinstance(resolved, int):
        raise InvalidParameterError(f"Unknown log level: {level}")
    for name, logger in logging.Logger.manager.loggerDict.items():
        if name.startswith("app") and isinstance(logger, logging.Logger):
            logger.setLevel(resolved)
