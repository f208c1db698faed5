"""Penalized simulation objective: weights, bounds, cache soundness."""

import numpy as np
import pytest

from gridpress import reference
from gridpress.optimizer.penalty import (NORMALIZATION, OptimizerConfig,
                                         PenaltyConfig, ScenarioEvaluator,
                                         control_bounds, penalty_value)
from gridpress.sim.state import ControlGrid, Violation, ViolationReport


def one_violation(element="N5", variable="pressure", magnitude=0.1e6):
    report = ViolationReport()
    report.add(Violation(element, variable, 600.0, "min",
                         3.9e6, 3.9e6 - magnitude))
    return report


class TestPenaltyValue:
    def test_quadratic_example(self):
        # 0.1 MPa excursion, weight 1e4, quadratic order: 1e4 * 0.1^2 = 100
        cfg = PenaltyConfig(order=2, default_weight=1.0e4)
        assert penalty_value(one_violation(), cfg) == pytest.approx(100.0)

    def test_linear_order(self):
        cfg = PenaltyConfig(order=1, default_weight=1.0e4)
        assert penalty_value(one_violation(), cfg) == pytest.approx(1000.0)

    def test_per_constraint_weight_override(self):
        cfg = PenaltyConfig(order=2, default_weight=1.0e4,
                            weights={("N5", "pressure"): 1.0e6})
        assert penalty_value(one_violation(), cfg) == pytest.approx(10_000.0)

    def test_normalization_per_variable(self):
        cfg = PenaltyConfig(order=2, default_weight=1.0)
        ratio = one_violation("C1", "ratio", 0.05)
        assert penalty_value(ratio, cfg) == pytest.approx(0.05 ** 2)
        dp = one_violation("C1", "dp", 2.0e5)
        assert penalty_value(dp, cfg) == pytest.approx(
            (2.0e5 / NORMALIZATION["dp"]) ** 2)

    def test_additive_over_violations(self):
        cfg = PenaltyConfig()
        report = one_violation()
        report.extend(one_violation("N9", "pressure", 0.2e6))
        assert penalty_value(report, cfg) == pytest.approx(
            penalty_value(one_violation(), cfg)
            + penalty_value(one_violation("N9", "pressure", 0.2e6), cfg))


class TestOptimizerConfig:
    def test_json_roundtrip_with_tuple_weight_keys(self):
        cfg = OptimizerConfig(budget_evals=42, penalty_order=1,
                              penalty_weights={("C1", "dp"): 5.0e3},
                              dt_sim=600.0)
        back = OptimizerConfig.from_json(cfg.to_json())
        assert back.budget_evals == 42
        assert back.penalty_config().weight("C1", "dp") == 5.0e3
        assert back.dt_sim == 600.0


class TestControlBounds:
    def test_reference_model_box(self, model):
        grid = ControlGrid(("C1", "C2"), 3, 4 * 3600.0, 0.0)
        lower, upper = control_bounds(model, grid)
        assert np.array_equal(lower, np.zeros(6))
        assert np.array_equal(upper, np.tile([360_000.0, 240_000.0], 3))


class TestScenarioEvaluator:
    @staticmethod
    def _evaluator(model, settled, **overrides):
        horizon = 4 * 3600.0
        grid = ControlGrid(("C1", "C2"), 2, horizon / 2, 0.0)
        cfg = OptimizerConfig(dt_sim=900.0, **overrides)
        return ScenarioEvaluator(model, settled,
                                 reference.design_w(0.0, horizon), grid, cfg)

    def test_feasible_point_has_zero_penalty(self, model, settled):
        ev = self._evaluator(model, settled)
        f = np.tile([reference.BASELINE_C1, reference.BASELINE_C2], 2)
        res = ev(f)
        assert res.feasible
        assert res.penalty == 0.0
        assert res.value == res.objective > 0.0

    def test_out_of_box_vector_projected(self, model, settled):
        ev = self._evaluator(model, settled)
        f = np.tile([reference.BASELINE_C1, reference.BASELINE_C2], 2)
        wild = f.copy()
        wild[0] = 9.9e6   # far above the station ceiling
        wild[1] = -5.0e4  # negative command
        projected = ev.project(wild)
        assert projected[0] == ev.upper[0] and projected[1] == 0.0
        assert ev(wild) is ev(projected)

    def test_cached_result_bit_identical_to_fresh_evaluator(self, model,
                                                            settled):
        ev = self._evaluator(model, settled)
        rng = np.random.default_rng(5)
        points = [rng.uniform(ev.lower, ev.upper) for _ in range(3)]
        first = [ev(p) for p in points]
        again = [ev(p) for p in points]
        assert ev.evaluations == 3  # repeats served from cache
        fresh = self._evaluator(model, settled)
        for p, a, b in zip(points, first, again):
            assert a is b
            c = fresh(p)
            assert c.value == a.value
            assert c.objective == a.objective
            assert c.penalty == a.penalty

    def test_nearby_points_collapse_to_one_simulation(self, model, settled):
        ev = self._evaluator(model, settled, q_rel=1e-2)
        f = np.tile([reference.BASELINE_C1, reference.BASELINE_C2], 2)
        a = ev(f)
        b = ev(f + 10.0)  # well inside one quantization step
        assert a is b
        assert ev.evaluations == 1
        assert ev.cache.hit_rate == 0.5
