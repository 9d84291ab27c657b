"""
The worker protocol: messages, parameters and the per-process state machine.
"""

from protocol.messages import (
    HEADER_BYTES,
    PAIR_BYTES,
    SCALAR_BYTES,
    Message,
    MessageKind,
)
from protocol.params import ProtocolParams
from protocol.worker import (
    Effect,
    Timer,
    TimerName,
    WorkerState,
    WorkerStatus,
    WorkObserver,
)

__all__ = [
    "HEADER_BYTES",
    "PAIR_BYTES",
    "SCALAR_BYTES",
    "Message",
    "MessageKind",
    "ProtocolParams",
    "Effect",
    "Timer",
    "TimerName",
    "WorkerState",
    "WorkerStatus",
    "WorkObserver",
]
