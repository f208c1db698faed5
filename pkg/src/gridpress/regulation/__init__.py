from .pid import PidConfig, PidState, pid_update
from .setpoints import RegulationConfig, Regulator, SetpointRecord
from .balance import InfeasibleLoadError, balance_machines
from .mileage import MachineLedger, MileageSuggestion, mileage_suggestion

__all__ = [
    "PidConfig",
    "PidState",
    "pid_update",
    "RegulationConfig",
    "Regulator",
    "SetpointRecord",
    "InfeasibleLoadError",
    "balance_machines",
    "MachineLedger",
    "MileageSuggestion",
    "mileage_suggestion",
]
