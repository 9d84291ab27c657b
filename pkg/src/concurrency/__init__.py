"""Host-side concurrency: running independent simulations side by side."""

from concurrency.sweep_executor import (
    SweepCell,
    load_sweep,
    run_sweep,
    save_sweep,
    successful_results,
)

__all__ = ["SweepCell", "load_sweep", "run_sweep", "save_sweep", "successful_results"]
