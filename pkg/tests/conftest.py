"""Shared fixtures.

The expensive inputs (reference model on its periodic orbit, the runnable
scenario bundle, the closed-loop benchmark) are session-scoped so the suite
pays for them once.
"""

import time

import pytest

from gridpress import reference
from gridpress.service.scenario import Scenario


@pytest.fixture(scope="session")
def model():
    return reference.build_model()


@pytest.fixture(scope="session")
def settled(model):
    """Reference initial condition: the periodic orbit under baseline
    control, sampled at hour 0."""
    return reference.settled_state(model)


@pytest.fixture(scope="session")
def scenario_dir(tmp_path_factory, settled):
    d = tmp_path_factory.mktemp("refsc")
    reference.write_scenario_bundle(d, state=settled)
    return d


@pytest.fixture(scope="session")
def scenario(scenario_dir):
    return Scenario.load(scenario_dir / "scenario.json")


@pytest.fixture(scope="session")
def quick_scenario_dir(tmp_path_factory, settled):
    """Same bundle with a small optimizer budget, for service/API tests
    that exercise plumbing rather than solution quality."""
    d = tmp_path_factory.mktemp("refsc-quick")
    reference.write_scenario_bundle(d, state=settled, budget_evals=12)
    return d


@pytest.fixture(scope="session")
def quick_scenario(quick_scenario_dir):
    return Scenario.load(quick_scenario_dir / "scenario.json")


@pytest.fixture(scope="session")
def benchmark(scenario):
    """6 h closed loop against the truth model, baseline vs optimized.

    Runs once per session (a few minutes); consumed by the acceptance
    benchmark and the cache statistics checks.
    """
    from gridpress.service.loop import ControlLoop

    duration = 6 * 3600.0
    t0 = time.time()
    base = ControlLoop(scenario, interval=900.0).run(
        duration, fixed_control=scenario.baseline_control(scenario.grid(0.0)))
    loop = ControlLoop(scenario, interval=900.0)
    opt = loop.run(duration)
    return {"baseline": base, "optimized": opt, "final_plan": loop.plan,
            "wall_seconds": time.time() - t0}
