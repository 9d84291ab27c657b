"""
Completed-code tables: contraction, merging, recovery choice, termination.

A contracted table holds no code together with one of its ancestors and no
pair of siblings. Contraction is confluent: whatever order codes arrive in,
the result is the set of maximal subtrees known to be complete.
"""

from bisect import bisect_left, insort
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Set, Tuple

from treecode.codes import (
    PAIR_SENTINEL,
    ROOT,
    ProblemCode,
    code_bytes,
    code_sort_key,
    parent,
    sibling,
)


@dataclass
class WorkMeter:
    """Counts codes touched by contraction, for the contraction cost model."""

    touched: int = 0

    def add(self, count: int) -> None:
        self.touched += count


@dataclass(frozen=True)
class CompletedTable:
    """An immutable, contracted set of completed codes.

    Build tables through ``contract`` or ``merge_reports``; the constructor
    trusts its input.
    """

    codes: FrozenSet[ProblemCode] = frozenset()
    ordered: Tuple[ProblemCode, ...] = field(default=(), repr=False, compare=False)
    size_bytes: int = field(default=0, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.ordered) != len(self.codes):
            object.__setattr__(self, "ordered", tuple(sorted(self.codes)))
        object.__setattr__(
            self, "size_bytes", sum(code_bytes(code) for code in self.codes)
        )

    def __len__(self) -> int:
        return len(self.codes)

    def __contains__(self, code: object) -> bool:
        return code in self.codes

    def covers(self, code: ProblemCode) -> bool:
        """True iff the table holds ``code`` or one of its ancestors."""
        return covered_by(self.codes, code)

    def is_root(self) -> bool:
        return self.codes == _ROOT_ONLY


EMPTY_TABLE = CompletedTable()
_ROOT_ONLY: FrozenSet[ProblemCode] = frozenset({ROOT})


def covered_by(codes: Iterable[ProblemCode], code: ProblemCode) -> bool:
    """True iff some member of ``codes`` equals ``code`` or is its ancestor."""
    pool = codes if isinstance(codes, (set, frozenset)) else set(codes)
    return any(code[:i] in pool for i in range(len(code) + 1))


class _TableBuilder:
    """Mutable working copy used while contracting."""

    def __init__(self, table: CompletedTable = EMPTY_TABLE) -> None:
        self.codes: Set[ProblemCode] = set(table.codes)
        self.ordered: List[ProblemCode] = list(table.ordered)
        self.touched = 0

    def add(self, code: ProblemCode) -> None:
        self.touched += 1
        if covered_by(self.codes, code):
            return

        lo = bisect_left(self.ordered, code)
        hi = bisect_left(self.ordered, code + (PAIR_SENTINEL,))
        if hi > lo:
            for descendant in self.ordered[lo:hi]:
                self.codes.discard(descendant)
            del self.ordered[lo:hi]
            self.touched += hi - lo

        while code:
            twin = sibling(code)
            if twin not in self.codes:
                break
            self.codes.discard(twin)
            del self.ordered[bisect_left(self.ordered, twin)]
            code = parent(code)
            self.touched += 1

        if not code:
            self.codes = {ROOT}
            self.ordered = [ROOT]
            return
        self.codes.add(code)
        insort(self.ordered, code)

    def build(self) -> CompletedTable:
        return CompletedTable(frozenset(self.codes), tuple(self.ordered))


def _absorb(
    builder: _TableBuilder,
    codes: Iterable[ProblemCode],
    meter: Optional[WorkMeter],
) -> CompletedTable:
    # Shallow codes first: later descendants are then rejected by the cover check.
    for code in sorted(set(codes), key=len):
        builder.add(code)
        if builder.codes == _ROOT_ONLY:
            break
    if meter is not None:
        meter.add(builder.touched)
    return builder.build()


def contract(
    codes: Iterable[ProblemCode], meter: Optional[WorkMeter] = None
) -> CompletedTable:
    """Contract an arbitrary code collection to its canonical table."""
    return _absorb(_TableBuilder(), codes, meter)


def merge_reports(
    table: CompletedTable,
    incoming: Iterable[ProblemCode],
    meter: Optional[WorkMeter] = None,
) -> CompletedTable:
    """Fold reported codes into a contracted table."""
    incoming = list(incoming)
    if not incoming or table.is_root():
        if meter is not None:
            meter.add(len(incoming))
        return table
    return _absorb(_TableBuilder(table), incoming, meter)


def termination_detected(table: CompletedTable) -> bool:
    """True iff the table has contracted to the root."""
    return table.is_root()


def _shared_prefix(a: ProblemCode, b: ProblemCode) -> int:
    length = 0
    for left, right in zip(a, b):
        if left != right:
            break
        length += 1
    return length


def select_recovery(
    table: CompletedTable, last_local: Optional[ProblemCode] = None
) -> Optional[ProblemCode]:
    """Pick uncompleted work by complementing a completed code.

    The deepest code wins, ties broken lexicographically. When the last code
    completed locally shares a prefix with some table codes, only the codes
    sharing the longest such prefix are considered.
    """
    if not table.codes or table.is_root():
        return None

    candidates = list(table.codes)
    if last_local is not None:
        scored = [(_shared_prefix(code, last_local), code) for code in candidates]
        best = max(score for score, _ in scored)
        if best > 0:
            candidates = [code for score, code in scored if score == best]

    return sibling(min(candidates, key=code_sort_key))


def is_contracted(codes: Iterable[ProblemCode]) -> bool:
    """Check the contracted-table invariants on a raw code collection."""
    pool = set(codes)
    if ROOT in pool:
        return len(pool) == 1
    for code in pool:
        if any(code[:i] in pool for i in range(len(code))):
            return False
        if sibling(code) in pool:
            return False
    return True
