from .gas import GasSpec, papay_z, papay_dz_dp, hofer_friction, METHANE_LIKE
from .network import (
    Node,
    Pipe,
    Machine,
    CompressorStation,
    ControlledValve,
    SimpleValve,
    Intake,
    Outlet,
    ConstraintSet,
    NetworkModel,
    ValidationReport,
    validate_network,
)
from .series import TimeSeries
from .objective import objective_integral

__all__ = [
    "GasSpec",
    "papay_z",
    "papay_dz_dp",
    "hofer_friction",
    "METHANE_LIKE",
    "Node",
    "Pipe",
    "Machine",
    "CompressorStation",
    "ControlledValve",
    "SimpleValve",
    "Intake",
    "Outlet",
    "ConstraintSet",
    "NetworkModel",
    "ValidationReport",
    "validate_network",
    "TimeSeries",
    "objective_integral",
]
