"""
Utility module for setting up application logging.

This module provides a function to configure logging for the matching engine,
including file rotation and console output.
"""

import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path

_HANDLER_TAG = "_hgmn_handler"


def setup_logging(log_dir=None):
    """
    Configures logging for CLI runs and scripts.

    Logs are written to both a rotating file (hgmn.log) and the console.
    The log level is determined by the 'LOG_LEVEL' environment variable,
    defaulting to INFO. Calling it twice does not duplicate handlers.

    Args:
        log_dir (str | Path | None): Directory for the log file. Falls back to
            'HGMN_LOG_DIR', then to './logs'.

    Returns:
        logging.Logger: The configured root logger.
    """
    log_level = os.environ.get("LOG_LEVEL", "INFO").upper()
    numeric_level = getattr(logging, log_level, logging.INFO)

    log_dir = Path(log_dir or os.environ.get("HGMN_LOG_DIR", "logs"))
    log_dir.mkdir(parents=True, exist_ok=True, mode=0o755)

    log_file = log_dir / "hgmn.log"

    logger = logging.getLogger()  # Get the root logger
    logger.setLevel(numeric_level)

    for handler in list(logger.handlers):
        if getattr(handler, _HANDLER_TAG, False):
            logger.removeHandler(handler)
            handler.close()

    # File handler - rotates logs after 1MB, keeps 5 backups
    file_handler = RotatingFileHandler(log_file, maxBytes=1024 * 1024, backupCount=5)
    file_handler.setLevel(numeric_level)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(numeric_level)

    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    for handler in (file_handler, console_handler):
        handler.setFormatter(formatter)
        setattr(handler, _HANDLER_TAG, True)
        logger.addHandler(handler)

    return logger
