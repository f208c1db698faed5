"""Receding-horizon planning: warm-started repeated Powell runs."""

from __future__ import annotations

import math
import uuid
from dataclasses import dataclass, field

import numpy as np

from ..sim.state import ControlGrid, ControlVector, Trajectory, ViolationReport
from .cache import EvaluationCache
from .penalty import EvalResult, OptimizerConfig, ScenarioEvaluator
from .powell import Budget, powell_minimize


@dataclass
class Plan:
    plan_id: str
    control: ControlVector
    trajectory: Trajectory | None
    objective: float
    penalty: float
    value: float
    violations: ViolationReport
    lineage: dict = field(default_factory=dict)

    @property
    def created_at(self) -> float:
        return self.lineage.get("created_at", self.control.grid.t0)

    def to_json(self) -> dict:
        return {
            "plan_id": self.plan_id,
            "control": self.control.to_json(),
            "objective": self.objective,
            "penalty": self.penalty,
            "value": self.value,
            "violations": self.violations.to_json(),
            "lineage": dict(self.lineage),
        }


def warm_start_from(prev: ControlVector, grid: ControlGrid) -> np.ndarray:
    """Shift the previous optimum onto the new grid by time alignment.

    Each new block takes the previous schedule's value at that block's start
    time; times past the old horizon duplicate the last block.
    """
    values = np.zeros(grid.size)
    prev_end = prev.grid.t0 + prev.grid.horizon
    for k in range(grid.n_steps):
        t = grid.t0 + k * grid.dt
        t_lookup = min(t, prev_end - 1e-9)
        for j, sid in enumerate(grid.stations):
            values[k * grid.m + j] = prev.flow_at(sid, t_lookup)
    return values


def repetitive_step(prev: Plan | None, model, new_state, new_w,
                    grid: ControlGrid, cfg: OptimizerConfig,
                    forced_bypass=(), cold_start=None) -> Plan:
    """One receding-horizon planning cycle.

    Warm start = previous optimum shifted in time (bypass-all schedule when
    there is no usable predecessor or it no longer simulates).
    ``forced_bypass`` names stations the operator has deactivated: their
    commands are pinned to zero for the whole horizon.
    """
    evaluator = ScenarioEvaluator(model, new_state, new_w, grid, cfg)
    for sid in forced_bypass:
        for k in range(grid.n_steps):
            evaluator.upper[grid.index(sid, k)] = 0.0
    if forced_bypass:
        evaluator.cache = EvaluationCache(evaluator.lower, evaluator.upper,
                                          cfg.q_rel)
    lineage = {"parent": prev.plan_id if prev else None,
               "created_at": new_w.t0, "warm_start": "shifted",
               "forced_bypass": sorted(forced_bypass)}

    if prev is not None:
        f0 = evaluator.project(warm_start_from(prev.control, grid))
        start_result = evaluator(f0)
        if not math.isfinite(start_result.value):
            f0 = np.zeros(grid.size)  # bypass-all fallback
            lineage["warm_start"] = "bypass-all (previous plan infeasible: "\
                + start_result.diagnostic + ")"
    elif cold_start is not None:
        f0 = evaluator.project(np.asarray(cold_start, dtype=float))
        lineage["warm_start"] = "cold (current operating point)"
    else:
        f0 = np.zeros(grid.size)
        lineage["warm_start"] = "cold (bypass-all)"

    budget = Budget(cfg.budget_evals, cfg.budget_seconds)
    state = powell_minimize(f0, evaluator, evaluator.lower, evaluator.upper,
                            budget, tol=cfg.tol, tol_line=cfg.tol_line,
                            reset_period=cfg.reset_period)
    best = evaluator(state.best_point)  # cached; bit-identical re-evaluation
    lineage["evaluations"] = evaluator.evaluations
    lineage["cache_hits"] = evaluator.cache.hits
    lineage["cache_hit_rate"] = evaluator.cache.hit_rate
    lineage["stop_reason"] = state.stop_reason

    control = ControlVector(grid, evaluator.project(state.best_point))
    trajectory = _predicted_trajectory(model, new_state, control, new_w, cfg)
    return Plan(uuid.uuid4().hex[:12], control, trajectory, best.objective,
                best.penalty, best.value, best.violations, lineage)


def _predicted_trajectory(model, initial, control, w, cfg) -> Trajectory | None:
    from ..sim.solver import SimulationError, simulate
    try:
        traj, _ = simulate(model, initial, control, w, dt_sim=cfg.dt_sim,
                           max_segment_len=cfg.max_segment_len)
        return traj
    except SimulationError:
        return None
