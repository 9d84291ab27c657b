"""
Subproblem codes and completed-code tables.
"""

from treecode.codes import (
    BYTES_PER_PAIR,
    ROOT,
    ROOT_TEXT,
    Branch,
    ProblemCode,
    child,
    code_bytes,
    code_sort_key,
    format_code,
    is_ancestor,
    make_code,
    parent,
    parse_code,
    sibling,
)
from treecode.table import (
    EMPTY_TABLE,
    CompletedTable,
    WorkMeter,
    contract,
    covered_by,
    is_contracted,
    merge_reports,
    select_recovery,
    termination_detected,
)

__all__ = [
    "BYTES_PER_PAIR",
    "ROOT",
    "ROOT_TEXT",
    "Branch",
    "ProblemCode",
    "child",
    "code_bytes",
    "code_sort_key",
    "format_code",
    "is_ancestor",
    "make_code",
    "parent",
    "parse_code",
    "sibling",
    "EMPTY_TABLE",
    "CompletedTable",
    "WorkMeter",
    "contract",
    "covered_by",
    "is_contracted",
    "merge_reports",
    "select_recovery",
    "termination_detected",
]
