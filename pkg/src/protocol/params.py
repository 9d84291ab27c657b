"""
Tunable parameters of the worker protocol.
"""

from dataclasses import dataclass, replace
from typing import Optional

from errorException import ConfigurationError


@dataclass(frozen=True)
class ProtocolParams:
    """Reporting, gossip, work-sharing and recovery knobs.

    Times are simulated seconds. ``t_req`` left as None is resolved by the
    kernel to ten times the latency of a header-only message.
    """

    c: int = 8
    m: int = 2
    t_report: float = 5.0
    t_table: float = 30.0
    k_fail: int = 3
    s_min: int = 2
    t_req: Optional[float] = None
    t_retry_max: float = 2.0
    root_patience: float = 50.0
    gossip_tables: bool = True
    kappa: float = 10e-6

    def __post_init__(self) -> None:
        for name in ("c", "m", "k_fail"):
            value = getattr(self, name)
            if value < 1:
                raise ConfigurationError(f"{name} must be >= 1", name, value)
        if self.s_min < 0:
            raise ConfigurationError("s_min must be >= 0", "s_min", self.s_min)
        for name in ("t_report", "t_table", "t_retry_max", "root_patience"):
            value = getattr(self, name)
            if value <= 0:
                raise ConfigurationError(f"{name} must be positive", name, value)
        if self.t_req is not None and self.t_req <= 0:
            raise ConfigurationError("t_req must be positive", "t_req", self.t_req)
        if self.kappa < 0:
            raise ConfigurationError("kappa must be >= 0", "kappa", self.kappa)

    @property
    def request_timeout(self) -> float:
        if self.t_req is None:
            raise ConfigurationError("t_req has not been resolved", "t_req")
        return self.t_req

    def with_request_timeout(self, default: float) -> "ProtocolParams":
        """Fill in ``t_req`` when it was left to the kernel."""
        if self.t_req is not None:
            return self
        return replace(self, t_req=default)

    def retry_delay(self, failures: int) -> float:
        """Exponential backoff after ``failures`` consecutive failed requests."""
        exponent = max(failures - 1, 0)
        return min(self.request_timeout * (2 ** min(exponent, 30)), self.t_retry_max)
