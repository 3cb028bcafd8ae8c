"""
Centralized error boundary for command-line runs.

Every exception leaving a command is mapped to a process exit code:
0 success, 2 validation, 3 numerical failure, 4 check-suite failure, 1 anything else.
"""

import json
import logging
import sys
from typing import Callable

from pydantic import ValidationError as PydanticValidationError

from src.exceptions import ConfigError, MatcherException

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1


def _report(error: dict) -> None:
    print(json.dumps(error), file=sys.stderr)


def run_with_error_handling(fn: Callable[[], None]) -> int:
    """Run `fn` and translate its outcome into an exit code."""
    try:
        fn()
    except MatcherException as error:
        level = logging.WARNING if error.exit_code in (2, 4) else logging.ERROR
        logger.log(
            level,
            "%s - %s",
            error.error_code,
            error.message,
            exc_info=error.exit_code == EXIT_INTERNAL,
        )
        _report(error.to_dict())
        return error.exit_code
    except PydanticValidationError as error:
        # Strip 'input' so raw file contents never end up in logs.
        details = [{k: v for k, v in err.items() if k not in ("input", "ctx", "url")} for err in error.errors()]
        logger.warning("Configuration validation error: %s", details)
        wrapped = ConfigError("Invalid configuration", details=details)
        _report(wrapped.to_dict())
        return wrapped.exit_code
    except Exception as error:
        logger.error("Unhandled exception: %s", error, exc_info=True)
        _report(MatcherException().to_dict())
        return EXIT_INTERNAL
    return EXIT_OK
