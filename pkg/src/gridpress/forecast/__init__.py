from .profiles import DailyProfile, DayRecord, learn_profile, forecast_demand
from .assemble import Nomination, AssemblyError, assemble_w, calendar_class

__all__ = [
    "DailyProfile",
    "DayRecord",
    "learn_profile",
    "forecast_demand",
    "Nomination",
    "AssemblyError",
    "assemble_w",
    "calendar_class",
]
