"""
Branch-and-bound operators over basic trees and the sequential oracle.
"""

from bnbEngine.operators import decompose
from bnbEngine.pool import (
    ActivePool,
    BestKnown,
    PoolEntry,
    SelectionRule,
    eliminate_check,
    select_next,
)
from bnbEngine.sequential import SequentialResult, sequential_solve

__all__ = [
    "decompose",
    "ActivePool",
    "BestKnown",
    "PoolEntry",
    "SelectionRule",
    "eliminate_check",
    "select_next",
    "SequentialResult",
    "sequential_solve",
]
