"""
Error types and logging helpers shared by every package.
"""

from errorException.custom_exceptions import (
    AuditViolationError,
    CodeError,
    ConfigurationError,
    SimulationError,
    TraceWriteError,
    TreeFormatError,
    TreeGenerationError,
    UnknownSubproblemError,
)
from errorException.logging_exceptions import (
    configure_logging,
    log_simulation_error,
    resolve_log_level,
)

__all__ = [
    "SimulationError",
    "CodeError",
    "TreeFormatError",
    "TreeGenerationError",
    "UnknownSubproblemError",
    "ConfigurationError",
    "AuditViolationError",
    "TraceWriteError",
    "configure_logging",
    "log_simulation_error",
    "resolve_log_level",
]
