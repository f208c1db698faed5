"""Integration layer: scenario files, persistence, the planning scheduler,
the CLI and the HTTP API."""

from .scenario import Scenario, ScenarioError, TruthConfig
from .store import DataStore
from .runner import (EXIT_OK, EXIT_BAD_SCENARIO, EXIT_DIVERGED, PlanInputs,
                     build_plan_inputs, run_scenario)
from .loop import ControlLoop, TruthModel

__all__ = [
    "Scenario", "ScenarioError", "TruthConfig", "DataStore",
    "EXIT_OK", "EXIT_BAD_SCENARIO", "EXIT_DIVERGED",
    "PlanInputs", "build_plan_inputs", "run_scenario",
    "ControlLoop", "TruthModel",
]
