"""
Reading and writing the ``bbtree v1`` text format.

One node per line, whitespace-separated fields::

    node_id parent_id branch_var branch_bit bound time_cost feasible

The root uses ``-1`` for parent, variable and bit. ``#`` starts a comment.
"""

from pathlib import Path
from typing import Dict, Iterable, List, Union

from errorException import TreeFormatError
from trees.basic_tree import BasicTree, BasicTreeNode

HEADER = "bbtree v1"
FIELD_COUNT = 7


def _parse_node(fields: List[str], line_number: int) -> BasicTreeNode:
    if len(fields) != FIELD_COUNT:
        raise TreeFormatError(
            f"expected {FIELD_COUNT} fields, found {len(fields)}", line_number
        )
    try:
        node_id, parent_id, var, bit = (int(value) for value in fields[:4])
        bound = float(fields[4])
        time_cost = float(fields[5])
        feasible_flag = int(fields[6])
    except ValueError as e:
        raise TreeFormatError(f"malformed field: {e}", line_number) from e

    if feasible_flag not in (0, 1):
        raise TreeFormatError("feasible flag must be 0 or 1", line_number)

    if parent_id == -1:
        if var != -1 or bit != -1:
            raise TreeFormatError("root must use -1 for variable and bit", line_number)
        return BasicTreeNode(
            node_id, None, None, None, bound, time_cost, bool(feasible_flag)
        )

    if var < 0 or bit not in (0, 1):
        raise TreeFormatError(
            "non-root node needs a variable id >= 0 and a bit of 0 or 1", line_number
        )
    return BasicTreeNode(
        node_id, parent_id, var, bit, bound, time_cost, bool(feasible_flag)
    )


def parse_basic_tree(stream: Iterable[str]) -> BasicTree:
    """Parse a basic tree from lines of text.

    Args:
        stream: Any iterable of lines, e.g. an open text file

    Returns:
        The validated tree

    Raises:
        TreeFormatError: naming the offending line
    """
    nodes: Dict[int, BasicTreeNode] = {}
    line_of: Dict[int, int] = {}
    seen_header = False

    for line_number, raw in enumerate(stream, 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if not seen_header:
            if text != HEADER:
                raise TreeFormatError(f"missing '{HEADER}' header", line_number)
            seen_header = True
            continue

        node = _parse_node(text.split(), line_number)
        if node.node_id in nodes:
            raise TreeFormatError(f"duplicate node id {node.node_id}", line_number)
        nodes[node.node_id] = node
        line_of[node.node_id] = line_number

    if not seen_header:
        raise TreeFormatError(f"missing '{HEADER}' header", 1)
    return BasicTree(nodes, line_of)


def render_basic_tree(tree: BasicTree) -> str:
    """Render a tree in the format ``parse_basic_tree`` reads."""
    lines = [
        HEADER,
        "# node_id parent_id branch_var branch_bit bound time_cost feasible",
    ]
    for node_id in sorted(tree.nodes):
        node = tree.nodes[node_id]
        parent_id = -1 if node.parent_id is None else node.parent_id
        var = -1 if node.branch_var is None else node.branch_var
        bit = -1 if node.branch_bit is None else node.branch_bit
        lines.append(
            f"{node_id} {parent_id} {var} {bit} "
            f"{node.bound!r} {node.time_cost!r} {int(node.feasible)}"
        )
    return "\n".join(lines) + "\n"


def load_basic_tree(path: Union[str, Path]) -> BasicTree:
    """Read a tree file from disk."""
    with open(path, "r", encoding="utf-8") as file:
        return parse_basic_tree(file)


def save_basic_tree(tree: BasicTree, path: Union[str, Path]) -> None:
    """Write a tree file to disk."""
    with open(path, "w", encoding="utf-8") as file:
        file.write(render_basic_tree(tree))
