"""
Active pool, selection rules, the incumbent and the elimination test.
"""

import math
from bisect import insort
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple

from errorException import ConfigurationError
from treecode import CompletedTable, ProblemCode


class SelectionRule(str, Enum):
    """Which pooled problem to branch from next."""

    DEPTH_FIRST = "depth-first"
    BEST_FIRST = "best-first"

    @classmethod
    def parse(cls, value: str) -> "SelectionRule":
        try:
            return cls(value)
        except ValueError as e:
            raise ConfigurationError(
                "rule must be 'depth-first' or 'best-first'", "rule", value
            ) from e


@dataclass(frozen=True)
class PoolEntry:
    """A pooled subproblem."""

    code: ProblemCode
    node_id: int
    bound: float
    recovered: bool = False


@dataclass
class BestKnown:
    """The incumbent U and the process that found it."""

    value: float = math.inf
    source: Optional[int] = None

    def offer(self, value: Optional[float], source: Optional[int] = None) -> bool:
        """Adopt ``value`` if it is strictly better; report whether it was."""
        if value is None or not value < self.value:
            return False
        self.value = value
        self.source = source
        return True

    @property
    def found(self) -> bool:
        return not math.isinf(self.value)


def eliminate_check(bound: float, best: BestKnown) -> bool:
    """True when a problem cannot beat the incumbent (``l(v) >= U``)."""
    return bound >= best.value


class ActivePool:
    """Pooled subproblems ordered by a selection rule.

    The entry the rule picks next sits at the front of the ordering; the
    entries handed out on a steal come from the back.
    """

    def __init__(self, rule: SelectionRule = SelectionRule.DEPTH_FIRST) -> None:
        self.rule = rule
        self._entries: Dict[ProblemCode, PoolEntry] = {}
        self._order: List[Tuple[Any, ...]] = []

    def _key(self, entry: PoolEntry) -> Tuple[Any, ...]:
        if self.rule is SelectionRule.BEST_FIRST:
            return (entry.bound, entry.code)
        return (-len(entry.code), entry.code)

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __contains__(self, code: object) -> bool:
        return code in self._entries

    def __iter__(self) -> Iterator[PoolEntry]:
        """Entries in selection order."""
        return (self._entries[key[-1]] for key in self._order)

    def insert(self, entry: PoolEntry) -> bool:
        """Add an entry; duplicates are ignored. Returns whether it was added."""
        if entry.code in self._entries:
            return False
        self._entries[entry.code] = entry
        insort(self._order, self._key(entry))
        return True

    def select_next(self) -> Optional[PoolEntry]:
        """Remove and return the entry the rule picks, None when empty."""
        if not self._order:
            return None
        key = self._order.pop(0)
        return self._entries.pop(key[-1])

    def steal(self, count: int) -> List[PoolEntry]:
        """Remove the ``count`` entries this pool would select last."""
        if count <= 0:
            return []
        taken = self._order[-count:]
        del self._order[-count:]
        return [self._entries.pop(key[-1]) for key in reversed(taken)]

    def remove_where(self, predicate: Any) -> List[PoolEntry]:
        """Remove every entry matching ``predicate``."""
        doomed = [entry for entry in self._entries.values() if predicate(entry)]
        if doomed:
            for entry in doomed:
                del self._entries[entry.code]
            self._order = [key for key in self._order if key[-1] in self._entries]
        return doomed

    def discard_covered(self, table: CompletedTable) -> List[PoolEntry]:
        """Drop entries whose subproblem the table already reports completed."""
        return self.remove_where(lambda entry: table.covers(entry.code))

    def codes(self) -> List[ProblemCode]:
        return [key[-1] for key in self._order]


def select_next(pool: ActivePool) -> Optional[PoolEntry]:
    """Module-level form of ``ActivePool.select_next``."""
    return pool.select_next()
