"""
Logging setup and exception logging helpers.

The application configures logging exactly once, from the CLI entry point.
Library modules only call ``logging.getLogger(__name__)`` and attach
structured context through ``extra``.
"""

import logging
import os
import sys
from typing import Any, Dict, Optional

from errorException.custom_exceptions import SimulationError

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logger = logging.getLogger(__name__)


def resolve_log_level(explicit: Optional[str] = None) -> int:
    """Pick the log level from the CLI flag, then the environment.

    Args:
        explicit: Level name given on the command line, if any

    Returns:
        A ``logging`` level constant
    """
    if os.getenv("DEBUG", "False").lower() == "true":
        return logging.DEBUG
    name = explicit or os.getenv("LOG_LEVEL") or "WARNING"
    level = logging.getLevelName(name.upper())
    if not isinstance(level, int):
        return logging.WARNING
    return level


def configure_logging(level: Optional[str] = None) -> None:
    """Configure the root logger for command-line use.

    Records go to stderr so reports printed on stdout stay machine-readable.
    """
    logging.basicConfig(
        level=resolve_log_level(level),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def log_simulation_error(
    error: SimulationError,
    context: Optional[Dict[str, Any]] = None,
    log: Optional[logging.Logger] = None,
) -> None:
    """Log a domain error with its code, cause and context."""
    target = log or logger
    target.error(
        f"{type(error).__name__}: {error.message}",
        extra={
            "error_code": error.error_code,
            "context": context or {},
            "original_error": str(error.__cause__) if error.__cause__ else None,
        },
        exc_info=target.isEnabledFor(logging.DEBUG),
    )
