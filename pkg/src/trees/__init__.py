"""
Workload trees: the basic-tree model, its file format and generators.
"""

from trees.basic_tree import MINIMIZE, BasicTree, BasicTreeNode, scale_granularity
from trees.generator import GeneratorParams, enumerate_trees, gen_random_tree
from trees.tree_io import (
    HEADER,
    load_basic_tree,
    parse_basic_tree,
    render_basic_tree,
    save_basic_tree,
)

__all__ = [
    "MINIMIZE",
    "BasicTree",
    "BasicTreeNode",
    "scale_granularity",
    "GeneratorParams",
    "enumerate_trees",
    "gen_random_tree",
    "HEADER",
    "load_basic_tree",
    "parse_basic_tree",
    "render_basic_tree",
    "save_basic_tree",
]
