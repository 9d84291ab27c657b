"""
Problem codes: a subproblem named by its root-to-node path.

A code is a tuple of ``Branch(var, bit)`` pairs. The empty tuple is the root.
Both children of a node branch on the same condition variable, so siblings
differ only in the bit of their last pair.
"""

import re
import sys
from typing import Iterable, NamedTuple, Tuple

from errorException import CodeError


class Branch(NamedTuple):
    """One decision on a condition variable."""

    var: int
    bit: int


ProblemCode = Tuple[Branch, ...]

ROOT: ProblemCode = ()
ROOT_TEXT = "ROOT"
BYTES_PER_PAIR = 8

# Sorts after every real pair; used as an exclusive upper bound for prefix ranges.
PAIR_SENTINEL = Branch(sys.maxsize, 2)

_PAIR_RE = re.compile(r"x(0|[1-9][0-9]*)=([01])")


def make_code(pairs: Iterable[Tuple[int, int]]) -> ProblemCode:
    """Build a validated code from ``(var, bit)`` pairs.

    Raises:
        CodeError: a bit is not 0/1, a variable is negative or repeats
    """
    code = tuple(Branch(int(var), int(bit)) for var, bit in pairs)
    seen = set()
    for branch in code:
        if branch.bit not in (0, 1):
            raise CodeError(f"bit must be 0 or 1, got {branch.bit}")
        if branch.var < 0:
            raise CodeError(f"variable id must be non-negative, got {branch.var}")
        if branch.var in seen:
            raise CodeError(f"variable x{branch.var} assigned twice in one code")
        seen.add(branch.var)
    return code


def parent(code: ProblemCode) -> ProblemCode:
    """Return the code with its last pair removed."""
    if not code:
        raise CodeError("root has no parent", "ROOT_HAS_NO_PARENT")
    return code[:-1]


def sibling(code: ProblemCode) -> ProblemCode:
    """Return the code with the bit of its last pair flipped."""
    if not code:
        raise CodeError("root has no sibling", "ROOT_HAS_NO_SIBLING")
    last = code[-1]
    return code[:-1] + (Branch(last.var, 1 - last.bit),)


def child(code: ProblemCode, var: int, bit: int) -> ProblemCode:
    """Extend a code by one decision."""
    return code + (Branch(var, bit),)


def is_ancestor(a: ProblemCode, b: ProblemCode) -> bool:
    """True iff ``a`` is a strict prefix of ``b``."""
    return len(a) < len(b) and b[: len(a)] == a


def code_bytes(code: ProblemCode) -> int:
    """Wire/storage size of a code under the shared byte model."""
    return BYTES_PER_PAIR * len(code)


def format_code(code: ProblemCode) -> str:
    """Render the canonical text form, e.g. ``x1=0.x2=1`` or ``ROOT``."""
    if not code:
        return ROOT_TEXT
    return ".".join(f"x{var}={bit}" for var, bit in code)


def parse_code(text: str) -> ProblemCode:
    """Parse the canonical text form back into a code."""
    if text == ROOT_TEXT:
        return ROOT
    pairs = []
    for token in text.split("."):
        match = _PAIR_RE.fullmatch(token)
        if match is None:
            raise CodeError(f"malformed code text {text!r}", "BAD_CODE_TEXT")
        pairs.append((int(match.group(1)), int(match.group(2))))
    return make_code(pairs)


def code_sort_key(code: ProblemCode) -> Tuple[int, ProblemCode]:
    """Deepest first, then lexicographic on the pairs."""
    return (-len(code), code)
