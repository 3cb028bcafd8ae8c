"""
This module defines and registers event listeners for the engine.
"""

import logging

from src.events import (
    epoch_completed,
    experiment_finished,
    level_trained,
    replicate_finished,
    stack_built,
)

logger = logging.getLogger(__name__)

_BOOKKEEPING_KEYS = {"event_id", "occurred_at", "event_type"}


def _describe(kwargs):
    return ", ".join(
        f"{key}={value}"
        for key, value in sorted(kwargs.items())
        if key not in _BOOKKEEPING_KEYS
    )


def log_epoch(sender, **kwargs):
    """Per-epoch losses are noisy; keep them at DEBUG."""
    logger.debug(
        "epoch %s level=%s loss=%.6f",
        kwargs.get("epoch"),
        kwargs.get("level", 0),
        kwargs.get("loss", float("nan")),
    )


def log_milestone_event(sender, **kwargs):
    """A generic listener that logs stack, level, replicate and experiment events."""
    event_name = kwargs.get("event_type", "unknown_signal")
    event_id = kwargs.get("event_id", "unknown")
    try:
        logger.info("%s event_id=%s - %s", event_name, event_id, _describe(kwargs))
    except Exception as e:
        logger.error(
            "Error in log_milestone_event for event '%s': %s",
            event_name,
            e,
            exc_info=True,
        )


# Register listeners
epoch_completed.connect(log_epoch)
stack_built.connect(log_milestone_event)
level_trained.connect(log_milestone_event)
replicate_finished.connect(log_milestone_event)
experiment_finished.connect(log_milestone_event)
