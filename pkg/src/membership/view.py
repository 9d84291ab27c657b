"""
Gossip-based group membership with heartbeat counters.

Each member keeps, per known member, the highest heartbeat it has seen and
the local time that heartbeat last increased. Views are pushed to one random
member per round; members whose heartbeat stalls for ``t_fail`` are dropped
locally. Dropped ids are remembered for ``t_cleanup`` so stale gossip does
not bring them back.
"""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errorException import ConfigurationError

if TYPE_CHECKING:
    from protocol.messages import Message

logger = logging.getLogger(__name__)

ViewEntries = Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class MembershipParams:
    """Timers of the membership protocol, in simulated seconds."""

    enabled: bool = False
    t_member: float = 1.0
    t_fail: Optional[float] = None
    t_cleanup: Optional[float] = None
    gossip_servers: Tuple[int, ...] = (0,)

    def __post_init__(self) -> None:
        if self.t_member <= 0:
            raise ConfigurationError(
                "t_member must be positive", "t_member", self.t_member
            )
        if self.t_fail is None:
            object.__setattr__(self, "t_fail", 30 * self.t_member)
        if self.t_cleanup is None:
            object.__setattr__(self, "t_cleanup", 2 * self.fail_timeout)
        if self.fail_timeout <= 0:
            raise ConfigurationError("t_fail must be positive", "t_fail", self.t_fail)
        if self.enabled and not self.gossip_servers:
            raise ConfigurationError(
                "membership needs at least one gossip server", "gossip_servers", []
            )

    @property
    def fail_timeout(self) -> float:
        return float(self.t_fail)  # type: ignore[arg-type]

    @property
    def cleanup_timeout(self) -> float:
        return float(self.t_cleanup)  # type: ignore[arg-type]

    @property
    def join_retry(self) -> float:
        return 5 * self.t_member


@dataclass
class MemberEntry:
    heartbeat: int
    last_heard: float


@dataclass
class MembershipView:
    """One member's belief about the group."""

    self_id: int
    entries: Dict[int, MemberEntry] = field(default_factory=dict)
    tombstones: Dict[int, Tuple[int, float]] = field(default_factory=dict)
    dynamic: bool = True

    def __post_init__(self) -> None:
        self.entries.setdefault(self.self_id, MemberEntry(0, 0.0))

    @classmethod
    def static(cls, self_id: int, members: Iterable[int]) -> "MembershipView":
        """A fixed view over a predetermined process set."""
        view = cls(self_id, dynamic=False)
        for member in members:
            view.entries.setdefault(member, MemberEntry(0, 0.0))
        return view

    @classmethod
    def seeded(
        cls, self_id: int, members: Iterable[int], now: float
    ) -> "MembershipView":
        """A gossiping view that starts out knowing ``members``."""
        view = cls(self_id)
        for member in members:
            view.entries.setdefault(member, MemberEntry(0, now))
        return view

    def __contains__(self, member: object) -> bool:
        return member in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def members(self) -> List[int]:
        return sorted(self.entries)

    def others(self) -> List[int]:
        return [member for member in sorted(self.entries) if member != self.self_id]

    def snapshot(self) -> ViewEntries:
        """``(id, heartbeat)`` pairs as carried on the wire."""
        return tuple(
            (member, self.entries[member].heartbeat) for member in sorted(self.entries)
        )


def pick_member(members: Sequence[int], rng: np.random.Generator) -> int:
    """Uniform choice over an already sorted member list."""
    return members[int(rng.integers(len(members)))]


def join(new_id: int, gossip_servers: Iterable[int]) -> List["Message"]:
    """Announce a new member to the gossip servers."""
    from protocol.messages import Message, MessageKind

    return [
        Message(MessageKind.JOIN, new_id, server, view=((new_id, 0),))
        for server in sorted(set(gossip_servers))
        if server != new_id
    ]


def gossip_view(
    view: MembershipView, now: float, rng: np.random.Generator
) -> Optional["Message"]:
    """Bump our heartbeat and push the whole view to one random member."""
    from protocol.messages import Message, MessageKind

    own = view.entries[view.self_id]
    own.heartbeat += 1
    own.last_heard = now
    others = view.others()
    if not others:
        return None
    target = pick_member(others, rng)
    return Message(MessageKind.VIEW_GOSSIP, view.self_id, target, view=view.snapshot())


def on_view(view: MembershipView, msg: "Message", now: float) -> MembershipView:
    """Max-merge incoming heartbeats into the view."""
    from protocol.messages import MessageKind

    refresh = msg.kind is MessageKind.JOIN
    for member, heartbeat in msg.view:
        if member == view.self_id:
            continue
        known = view.entries.get(member)
        if known is not None:
            if heartbeat > known.heartbeat:
                known.heartbeat = heartbeat
                known.last_heard = now
            elif refresh:
                known.last_heard = now
            continue
        tomb = view.tombstones.get(member)
        if tomb is not None and heartbeat <= tomb[0] and not refresh:
            continue
        view.tombstones.pop(member, None)
        view.entries[member] = MemberEntry(heartbeat, now)
    return view


def suspect_failures(
    view: MembershipView, now: float, t_fail: float, t_cleanup: Optional[float] = None
) -> Tuple[MembershipView, List[int]]:
    """Drop members not heard from for longer than ``t_fail``."""
    if not view.dynamic:
        return view, []
    removed = [
        member
        for member, entry in sorted(view.entries.items())
        if member != view.self_id and now - entry.last_heard > t_fail
    ]
    for member in removed:
        view.tombstones[member] = (view.entries.pop(member).heartbeat, now)
    if t_cleanup is not None:
        expired = [m for m, (_, at) in view.tombstones.items() if now - at > t_cleanup]
        for member in expired:
            del view.tombstones[member]
    if removed:
        logger.debug(
            "Suspected failed members",
            extra={"member": view.self_id, "removed": removed, "sim_time": now},
        )
    return view, removed
