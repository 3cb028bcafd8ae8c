"""
Bootstrap and runtime configuration helpers for the command-line entry point.
"""

import logging
import os

from dotenv import load_dotenv

from src.utils.logger import setup_logging

DEFAULT_WORKERS = 1


def load_environment() -> None:
    """Load environment variables from the local environment, .env, and config.env files."""
    # Load config.env first so that .env can override its values (secrets vs defaults)
    load_dotenv("config.env")
    load_dotenv(".env")


def default_workers() -> int:
    """Replicate pool width from HGMN_WORKERS; unparseable values fall back to 1."""
    try:
        return max(1, int(os.environ.get("HGMN_WORKERS", DEFAULT_WORKERS)))
    except ValueError:
        return DEFAULT_WORKERS


def configure_runtime() -> logging.Logger:
    """
    Configure logging and register event listeners for a CLI run.
    """
    load_environment()
    logger = setup_logging()
    # Registers listeners on import.
    import src.listeners  # noqa: F401

    logger.debug("Runtime configured (workers=%d).", default_workers())
    return logger
