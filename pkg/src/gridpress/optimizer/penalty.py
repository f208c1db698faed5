"""Penalized objective over the simulator, with caching.

Control-variable bounds are enforced by projection before evaluation;
dependent-variable bound violations enter the objective as additive
penalties, so infeasible trial points steer the search instead of
aborting it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core.objective import objective_integral
from ..sim.solver import SimulationError, simulate
from ..sim.state import ControlVector, ViolationReport
from .cache import EvaluationCache

# violation magnitudes are divided by these before weighting, so one unit of
# penalty corresponds to e.g. 1 MPa of pressure excursion
NORMALIZATION = {
    "pressure": 1.0e6,
    "dp": 1.0e6,
    "ratio": 1.0,
    "flow": 1.0e4,
    "temperature": 10.0,
}


@dataclass
class PenaltyConfig:
    order: int = 2                       # 1 or 2
    default_weight: float = 1.0e4
    weights: dict = field(default_factory=dict)  # (element_id, variable) -> w

    def weight(self, element_id: str, variable: str) -> float:
        return self.weights.get((element_id, variable), self.default_weight)


def penalty_value(report: ViolationReport, cfg: PenaltyConfig) -> float:
    total = 0.0
    for v in report:
        norm = NORMALIZATION.get(v.variable, 1.0)
        total += cfg.weight(v.element_id, v.variable) \
            * (v.magnitude / norm) ** cfg.order
    return total


@dataclass
class OptimizerConfig:
    budget_evals: int = 180
    budget_seconds: float = 900.0
    penalty_order: int = 2
    penalty_weights: dict = field(default_factory=dict)
    default_weight: float = 1.0e4
    q_rel: float = 1e-3
    tol_line: float = 1e-3
    tol: float = 1e-6
    reset_period: int | None = None
    dt_sim: float = 300.0
    max_segment_len: float = 5000.0

    def penalty_config(self) -> PenaltyConfig:
        weights = {tuple(k.split("/")) if isinstance(k, str) else k: v
                   for k, v in self.penalty_weights.items()}
        return PenaltyConfig(self.penalty_order, self.default_weight, weights)

    def to_json(self) -> dict:
        return {"budget_evals": self.budget_evals,
                "budget_seconds": self.budget_seconds,
                "penalty_order": self.penalty_order,
                "penalty_weights": {f"{k[0]}/{k[1]}" if isinstance(k, tuple) else k: v
                                    for k, v in self.penalty_weights.items()},
                "default_weight": self.default_weight,
                "q_rel": self.q_rel, "tol_line": self.tol_line, "tol": self.tol,
                "reset_period": self.reset_period, "dt_sim": self.dt_sim,
                "max_segment_len": self.max_segment_len}

    @classmethod
    def from_json(cls, d: dict) -> "OptimizerConfig":
        kw = {k: d[k] for k in cls().__dict__ if k in d}
        return cls(**kw)


@dataclass(frozen=True)
class EvalResult:
    value: float
    objective: float
    penalty: float
    violations: ViolationReport
    diagnostic: str = ""

    @property
    def feasible(self) -> bool:
        return len(self.violations) == 0 and math.isfinite(self.value)


class ScenarioEvaluator:
    """Callable mapping a raw control vector to its penalized objective.

    Projects onto the control box first (commanded-flow bounds are handled by
    projection, not penalty), then simulates, discards the first step, and
    integrates fuel plus weighted violations.  Results are cached on the
    quantized vector.
    """

    def __init__(self, model, initial_state, w, grid, cfg: OptimizerConfig,
                 cache: EvaluationCache | None = None):
        self.model = model
        self.initial_state = initial_state
        self.w = w
        self.grid = grid
        self.cfg = cfg
        self.penalty_cfg = cfg.penalty_config()
        self.lower, self.upper = control_bounds(model, grid)
        self.cache = cache if cache is not None else \
            EvaluationCache(self.lower, self.upper, cfg.q_rel)
        self.evaluations = 0   # actual simulator invocations

    def project(self, f: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(f, dtype=float), self.lower, self.upper)

    def __call__(self, f) -> EvalResult:
        fp = self.project(f)
        hit = self.cache.get(fp)
        if hit is not None:
            return hit
        result = self._evaluate(fp)
        self.evaluations += 1
        return self.cache.put(fp, result)

    def _evaluate(self, fp: np.ndarray) -> EvalResult:
        control = ControlVector(self.grid, fp)
        try:
            traj, report = simulate(self.model, self.initial_state, control,
                                    self.w, dt_sim=self.cfg.dt_sim,
                                    max_segment_len=self.cfg.max_segment_len)
        except SimulationError as exc:
            return EvalResult(float("inf"), float("inf"), float("inf"),
                              ViolationReport(), diagnostic=str(exc))
        useful = traj.without_first_step() if len(traj) > 1 else traj
        objective = objective_integral(useful.times, useful.fuel_rates()) \
            if useful.fuel_rates() else 0.0
        penalty = penalty_value(report, self.penalty_cfg)
        return EvalResult(objective + penalty, objective, penalty, report)


def control_bounds(model, grid):
    """Box for the flat control vector: [0, station f_max] per entry.

    Zero is a legal command (bypass request); the station's own f_min acts as
    the bypass threshold inside the simulator.
    """
    by_station = {st.id: st.f_max for st in model.stations()}
    upper_row = np.array([by_station[s] for s in grid.stations])
    lower = np.zeros(grid.size)
    upper = np.tile(upper_row, grid.n_steps)
    return lower, upper
