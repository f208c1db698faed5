"""Running-hours tracking and operator alternation suggestions.

The layer never switches machines on its own: when the mileage spread grows
past the threshold it emits a suggestion, and the activation decision stays
with the operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class MachineLedger:
    station_id: str
    hours: dict                      # machine id -> running hours
    starts: dict = field(default_factory=dict)
    last_alternation: float | None = None
    threshold: float = 0.10          # relative spread triggering a suggestion

    def __post_init__(self):
        if not (0 < self.threshold < 1):
            raise ValueError("threshold must be in (0, 1)")
        if any(h < 0 for h in self.hours.values()):
            raise ValueError("running hours must be >= 0")

    def accumulate(self, machine_id: str, dt_hours: float):
        if dt_hours < 0:
            raise ValueError("running time cannot decrease")
        self.hours[machine_id] = self.hours.get(machine_id, 0.0) + dt_hours

    def record_start(self, machine_id: str, time: float):
        self.starts[machine_id] = self.starts.get(machine_id, 0) + 1
        self.last_alternation = time

    def to_json(self) -> dict:
        return {"station_id": self.station_id, "hours": dict(self.hours),
                "starts": dict(self.starts),
                "last_alternation": self.last_alternation,
                "threshold": self.threshold}


@dataclass(frozen=True)
class MileageSuggestion:
    station_id: str
    activate: str        # machine with fewest hours
    rest: str            # machine with most hours
    spread: float        # relative running-hours spread

    def to_json(self) -> dict:
        return {"station_id": self.station_id, "activate": self.activate,
                "rest": self.rest, "spread": self.spread}


def mileage_suggestion(ledger: MachineLedger):
    """Suggest alternating machines when the hour spread exceeds the
    threshold; None otherwise.  Pure, and monotone in the spread."""
    if len(ledger.hours) < 2:
        return None
    lo_id = min(ledger.hours, key=lambda m: (ledger.hours[m], m))
    hi_id = max(ledger.hours, key=lambda m: (ledger.hours[m], m))
    hi = ledger.hours[hi_id]
    lo = ledger.hours[lo_id]
    mean = sum(ledger.hours.values()) / len(ledger.hours)
    if mean <= 0:
        return None
    spread = (hi - lo) / mean
    if spread <= ledger.threshold:
        return None
    return MileageSuggestion(ledger.station_id, lo_id, hi_id, spread)
