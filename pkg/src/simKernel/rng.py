"""
Deterministic random streams, one per purpose and process.
"""

from typing import Optional

import numpy as np

PURPOSES = ("targets", "loss", "schedule")


class RngStreams:
    """Split one scenario seed into independent generators.

    A stream depends only on the seed, its purpose and its process id, so
    adding a consumer never shifts the draws of another.
    """

    def __init__(self, seed: int) -> None:
        self.seed = seed

    def stream(
        self, purpose: str, process: Optional[int] = None
    ) -> np.random.Generator:
        if purpose not in PURPOSES:
            raise ValueError(f"unknown random stream purpose: {purpose}")
        slot = 0 if process is None else process + 1
        key = (PURPOSES.index(purpose), slot)
        sequence = np.random.SeedSequence(self.seed, spawn_key=key)
        return np.random.default_rng(sequence)
