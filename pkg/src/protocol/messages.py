"""
Protocol messages and their byte model.

Size = 64-byte header + 8 bytes per code pair + 8 bytes per scalar or view
entry. The latency model and the communication metrics both use it.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from treecode import ProblemCode

HEADER_BYTES = 64
PAIR_BYTES = 8
SCALAR_BYTES = 8


class MessageKind(str, Enum):
    WORK_REQUEST = "WorkRequest"
    WORK_GRANT = "WorkGrant"
    WORK_DENIED = "WorkDenied"
    WORK_REPORT = "WorkReport"
    TABLE_GOSSIP = "TableGossip"
    TERMINATION_NOTICE = "TerminationNotice"
    JOIN = "Join"
    VIEW_GOSSIP = "ViewGossip"


@dataclass(frozen=True)
class Message:
    """One point-to-point message.

    ``best`` is the sender's incumbent, piggybacked on grants, reports, table
    gossip and termination notices. ``request_id`` ties replies to requests.
    """

    kind: MessageKind
    sender: int
    receiver: int
    codes: Tuple[ProblemCode, ...] = ()
    best: Optional[float] = None
    request_id: Optional[int] = None
    busy: Optional[bool] = None
    view: Tuple[Tuple[int, int], ...] = ()
    size_bytes: int = field(init=False, compare=False)

    def __post_init__(self) -> None:
        scalars = sum(
            value is not None for value in (self.best, self.request_id, self.busy)
        )
        pairs = sum(len(code) for code in self.codes)
        scalars += len(self.view)
        size = HEADER_BYTES + PAIR_BYTES * pairs + SCALAR_BYTES * scalars
        object.__setattr__(self, "size_bytes", size)
