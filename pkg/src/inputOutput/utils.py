"""Helpers shared by the command-line operations."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Union

from errorException import ConfigurationError
from trees import BasicTree

logger = logging.getLogger(__name__)


def parse_int_list(text: str, option: str) -> List[int]:
    """Parse a comma-separated list such as ``10,30,50``.

    Raises:
        ConfigurationError: an item is not an integer, or the list is empty
    """
    try:
        values = [int(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigurationError(
            f"{option} expects comma-separated integers", option, text
        ) from e
    if not values:
        raise ConfigurationError(f"{option} needs at least one value", option, text)
    return values


def tree_summary(tree: BasicTree) -> Dict[str, Any]:
    """Node count, leaf count and depth statistics of a tree."""
    return {
        "nodes": len(tree),
        "leaves": sum(1 for _ in tree.leaves()),
        "max_depth": tree.max_depth,
        "mean_depth": round(tree.mean_depth, 3),
        "total_cost": tree.total_cost,
        "best_feasible": tree.best_feasible(),
    }


def reproducibility_header(seed: int, parameters: Dict[str, Any]) -> str:
    """The first line of every run report: seed and full parameter set."""
    return f"# seed={seed} parameters={json.dumps(parameters, sort_keys=True)}"


def write_output(text: str, path: Optional[Union[str, Path]], stream: TextIO) -> None:
    """Write UTF-8 text to ``path``, or to ``stream`` when no path is given."""
    if path is None:
        stream.write(text)
        return
    with open(path, "w", encoding="utf-8") as file:
        file.write(text)
    logger.debug("Wrote output file", extra={"path": str(path), "chars": len(text)})
