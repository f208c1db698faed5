from .state import (
    SystemState,
    Trajectory,
    ExogenousInputs,
    ControlGrid,
    ControlVector,
    Violation,
    ViolationReport,
)
from .fuel import fuel_rate
from .solver import (
    CompiledNetwork,
    steady_state,
    simulate,
    check_constraints,
    BoundarySpec,
    InfeasibleBoundaryError,
    ConvergenceError,
    SimulationError,
)

__all__ = [
    "SystemState",
    "Trajectory",
    "ExogenousInputs",
    "ControlGrid",
    "ControlVector",
    "Violation",
    "ViolationReport",
    "fuel_rate",
    "CompiledNetwork",
    "steady_state",
    "simulate",
    "check_constraints",
    "BoundarySpec",
    "InfeasibleBoundaryError",
    "ConvergenceError",
    "SimulationError",
]
