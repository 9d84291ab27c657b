"""
Affine-latency network with message loss and partitions.

Latency of a message of ``L`` bytes is ``base + per_byte * L`` milliseconds.
Messages are never duplicated or corrupted; they are either delivered once
or dropped.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, NamedTuple, Optional, Sequence

import numpy as np

from errorException import ConfigurationError
from protocol import Message

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetworkParams:
    base_latency_ms: float = 1.5
    per_byte_ms: float = 0.005
    loss_prob: float = 0.0

    def __post_init__(self) -> None:
        if self.base_latency_ms < 0 or self.per_byte_ms < 0:
            raise ConfigurationError(
                "latency parameters must be non-negative",
                "base_latency_ms",
                self.base_latency_ms,
            )
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ConfigurationError(
                "loss_prob must lie in [0, 1]", "loss_prob", self.loss_prob
            )

    def latency(self, size_bytes: int) -> float:
        """Transit time in simulated seconds."""
        return (self.base_latency_ms + self.per_byte_ms * size_bytes) / 1000.0


class DropReason(str, Enum):
    LOSS = "loss"
    PARTITION = "partition"
    DEAD_RECEIVER = "dead-receiver"


class Transmission(NamedTuple):
    deliver_at: Optional[float]
    dropped: Optional[DropReason]


class NetworkModel:
    """Decides the fate of every message sent."""

    def __init__(self, params: NetworkParams, rng: np.random.Generator) -> None:
        self.params = params
        self.rng = rng
        self._group_of: Dict[int, int] = {}

    @property
    def partitioned(self) -> bool:
        return bool(self._group_of)

    def set_partition(self, groups: Sequence[Iterable[int]]) -> None:
        """Split processes into reachability classes; no groups heals the network.

        Processes missing from every group share one extra class.
        """
        self._group_of = {
            process: index for index, group in enumerate(groups) for process in group
        }

    def reachable(self, sender: int, receiver: int) -> bool:
        if not self._group_of:
            return True
        return self._group_of.get(sender, -1) == self._group_of.get(receiver, -1)

    def transmit(self, msg: Message, now: float) -> Transmission:
        # The loss draw is taken for every message so partitions never shift the stream.
        lost = self.params.loss_prob > 0 and self.rng.random() < self.params.loss_prob
        if not self.reachable(msg.sender, msg.receiver):
            return Transmission(None, DropReason.PARTITION)
        if lost:
            return Transmission(None, DropReason.LOSS)
        return Transmission(now + self.params.latency(msg.size_bytes), None)
