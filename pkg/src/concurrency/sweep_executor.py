"""
Run a processor-by-seed sweep on a host thread pool.

Every cell is an independent, internally sequential simulation; cells share
only the immutable tree. A cell that raises or does not terminate is recorded
as failed, kept out of the averages, and the sweep goes on.
"""

import concurrent.futures
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from errorException import SimulationError
from metrics import Outcome, RunResult
from simKernel import Scenario, load_tree, scenarios_for, simulate
from trees import BasicTree

logger = logging.getLogger(__name__)


@dataclass
class SweepCell:
    processes: int
    seed: int
    result: Optional[RunResult] = None
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "processes": self.processes,
            "seed": self.seed,
            "result": self.result.to_dict() if self.result is not None else None,
            "error": self.error,
        }

    @property
    def succeeded(self) -> bool:
        return (
            self.error is None
            and self.result is not None
            and self.result.outcome is Outcome.TERMINATED
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepCell":
        result = data.get("result")
        return cls(
            data["processes"],
            data["seed"],
            RunResult.from_dict(result) if result is not None else None,
            data.get("error"),
        )


def _run_cell(scenario: Scenario, tree: BasicTree) -> RunResult:
    return simulate(scenario, tree)


def run_sweep(
    base: Scenario,
    processors: Sequence[int],
    seeds: Sequence[int],
    jobs: int = 1,
    tree: Optional[BasicTree] = None,
) -> List[SweepCell]:
    """Run every (processors, seed) cell of the cross product.

    Args:
        base: Scenario the cells are derived from
        processors: Process counts to sweep
        seeds: Scenario seeds to sweep
        jobs: Host threads used to run cells concurrently
        tree: Preloaded tree, loaded from ``base`` when omitted

    Returns:
        Cells ordered by process count, then seed
    """
    tree = tree if tree is not None else load_tree(base)
    cells: Dict[tuple, SweepCell] = {}
    futures: Dict[concurrent.futures.Future, SweepCell] = {}

    with concurrent.futures.ThreadPoolExecutor(max_workers=max(jobs, 1)) as executor:
        for count in processors:
            for seed in seeds:
                cell = cells[(count, seed)] = SweepCell(count, seed)
                try:
                    (scenario,) = scenarios_for(base, [count], [seed])
                except SimulationError as e:
                    cell.error = str(e)
                    continue
                futures[executor.submit(_run_cell, scenario, tree)] = cell

        for future in concurrent.futures.as_completed(futures):
            cell = futures[future]
            try:
                result: RunResult = future.result()
            except Exception as e:
                cell.error = f"{type(e).__name__}: {e}"
                logger.warning(
                    "Sweep cell failed",
                    extra={
                        "processes": cell.processes,
                        "seed": cell.seed,
                        "error": cell.error,
                    },
                    exc_info=not isinstance(e, SimulationError),
                )
                continue
            cell.result = result
            if result.outcome is not Outcome.TERMINATED:
                cell.error = f"run ended in {result.outcome.value}"
                logger.warning(
                    "Sweep cell did not terminate",
                    extra={
                        "processes": cell.processes,
                        "seed": cell.seed,
                        "outcome": result.outcome.value,
                    },
                )

    return [cells[key] for key in sorted(cells)]


def save_sweep(cells: Sequence[SweepCell], path: Union[str, Path]) -> None:
    document = {"cells": [cell.to_dict() for cell in cells]}
    with open(path, "w", encoding="utf-8") as file:
        json.dump(document, file, sort_keys=True, indent=2)
        file.write("\n")


def successful_results(cells: Sequence[SweepCell]) -> List[RunResult]:
    """Results of the cells that terminated, the only ones averaged."""
    return [cell.result for cell in cells if cell.succeeded and cell.result is not None]


def load_sweep(path: Union[str, Path]) -> List[SweepCell]:
    with open(path, "r", encoding="utf-8") as file:
        document = json.load(file)
    return [SweepCell.from_dict(cell) for cell in document.get("cells", [])]
