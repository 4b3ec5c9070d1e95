"""SNR sweeps of the optimized bound."""

from __future__ import annotations

import time
from typing import Optional

from .optimizer import OptimizerConfig, WwbResult, make_evaluator, maximize
from .parallel import ordered_map
from .scenario import Scenario


def scenario_bound(scenario: Scenario, snr_db: float, config: Optional[OptimizerConfig] = None) -> WwbResult:
    """Optimized bound for ``scenario`` at one SNR point."""
    model = scenario.model_at(snr_db)
    evaluator = make_evaluator(scenario.geometry, model, scenario.prior)
    return maximize(evaluator, config or scenario.optimizer, scenario.prior)


def _point(task):
    scenario, snr, config = task
    t0 = time.perf_counter()
    res = scenario_bound(scenario, snr, config)
    return res, time.perf_counter() - t0


def bound_sweep_timed(
    scenario: Scenario, workers: int = 1, config: Optional[OptimizerConfig] = None
) -> list[tuple[WwbResult, float]]:
    """Like :func:`bound_sweep` but pairs each result with its wall time in seconds."""
    tasks = [(scenario, snr, config) for snr in scenario.snr_db]
    return ordered_map(_point, tasks, workers)


def bound_sweep(scenario: Scenario, workers: int = 1, config: Optional[OptimizerConfig] = None) -> list[WwbResult]:
    """Optimized bound at every SNR point, in sweep order."""
    return [res for res, _ in bound_sweep_timed(scenario, workers, config)]
