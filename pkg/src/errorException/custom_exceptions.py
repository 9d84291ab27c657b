"""
Exception hierarchy for the simulator and protocol library.

Every error raised on purpose derives from ``SimulationError`` and carries a
short error code, so the CLI can map failures to exit codes and log records
can be filtered by code.
"""

from typing import Any, Dict, Optional


class SimulationError(Exception):
    """Base class for all domain errors."""

    def __init__(self, message: str, error_code: Optional[str] = None) -> None:
        """Initialize the error with a message and an optional error code."""
        super().__init__(message)
        self.message = message
        self.error_code = error_code

    def __str__(self) -> str:
        """Return string representation of the error."""
        if self.error_code:
            return f"[{self.error_code}] {self.message}"
        return self.message


class CodeError(SimulationError):
    """Raised when a problem code operation is not defined for its input."""

    def __init__(self, message: str, error_code: str = "INVALID_CODE") -> None:
        super().__init__(message, error_code)


class TreeFormatError(SimulationError):
    """Raised when a basic-tree document is malformed."""

    def __init__(self, message: str, line_number: Optional[int] = None) -> None:
        """Initialize the parse error with the offending line number."""
        super().__init__(message, "TREE_PARSE_ERROR")
        self.line_number = line_number

    def __str__(self) -> str:
        """Return the message prefixed with the line number when known."""
        base_msg = super().__str__()
        if self.line_number is not None:
            return f"{base_msg} (line {self.line_number})"
        return base_msg


class TreeGenerationError(SimulationError):
    """Raised when the random tree generator cannot reach its target size."""

    def __init__(self, message: str, attempts: int = 0) -> None:
        super().__init__(message, "TREE_GENERATION_FAILED")
        self.attempts = attempts


class UnknownSubproblemError(SimulationError):
    """Raised when a code does not resolve to a node of the basic tree."""

    def __init__(self, code_text: str, message: Optional[str] = None) -> None:
        """Initialize with the canonical text of the unresolved code."""
        if message is None:
            message = f"unknown subproblem {code_text}"
        super().__init__(message, "UNKNOWN_SUBPROBLEM")
        self.code_text = code_text


class ConfigurationError(SimulationError):
    """Raised when a scenario or parameter set is invalid."""

    def __init__(
        self,
        message: str,
        config_key: Optional[str] = None,
        config_value: Any = None,
    ) -> None:
        """Initialize configuration error with config details."""
        super().__init__(message, "CONFIG_ERROR")
        self.config_key = config_key
        self.config_value = config_value

    def __str__(self) -> str:
        parts = [super().__str__()]
        if self.config_key:
            parts.append(f"Key: {self.config_key}")
        if self.config_value is not None:
            parts.append(f"Value: {self.config_value!r}")
        return " | ".join(parts)


class AuditViolationError(SimulationError):
    """Raised by the global audit when a safety property is broken."""

    def __init__(
        self, message: str, context: Optional[Dict[str, Any]] = None
    ) -> None:
        super().__init__(message, "AUDIT_VIOLATION")
        self.context = context or {}


class TraceWriteError(SimulationError):
    """Raised when the event trace sink cannot be written."""

    def __init__(self, message: str, path: Optional[str] = None) -> None:
        super().__init__(message, "TRACE_IO_ERROR")
        self.path = path
