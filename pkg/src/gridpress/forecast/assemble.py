"""Assembly of the full exogenous-input bundle for one planning horizon."""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field

from ..core.series import TimeSeries
from ..sim.state import ExogenousInputs


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True)
class Nomination:
    """Declared flow plan for an exchange or retail point: (start, end, value)
    triples in seconds / Nm3/h, piecewise constant."""

    point_id: str
    pieces: tuple            # of (start_s, end_s, value_nm3h)
    source: str = "dispatcher"

    def __post_init__(self):
        pieces = tuple((float(a), float(b), float(v)) for a, b, v in self.pieces)
        if not pieces:
            raise ValueError("nomination needs at least one piece")
        for a, b, _ in pieces:
            if b <= a:
                raise ValueError("nomination piece must have end > start")
        object.__setattr__(self, "pieces", pieces)

    def covers(self, t0: float, t1: float) -> bool:
        if self.pieces[0][0] > t0 + 1e-9 or self.pieces[-1][1] < t1 - 1e-9:
            return False
        for (_, e0, _), (s1, _, _) in zip(self.pieces, self.pieces[1:]):
            if s1 > e0 + 1e-9:
                return False
        return True

    def series(self) -> TimeSeries:
        times, values = [], []
        for a, b, v in self.pieces:
            times.append(a)
            values.append(v)
        times.append(self.pieces[-1][1])
        values.append(self.pieces[-1][2])
        return TimeSeries(tuple(times), tuple(values), "previous")

    def to_json(self) -> dict:
        return {"point_id": self.point_id, "source": self.source,
                "pieces": [[a, b, v] for a, b, v in self.pieces]}

    @classmethod
    def from_json(cls, d: dict) -> "Nomination":
        return cls(d["point_id"], tuple(tuple(p) for p in d["pieces"]),
                   d.get("source", "dispatcher"))


def load_nominations(path):
    with open(path) as fh:
        return [Nomination.from_json(d) for d in json.load(fh)]


def save_nominations(noms, path):
    with open(path, "w") as fh:
        json.dump([n.to_json() for n in noms], fh, indent=2)


def calendar_class(date: _dt.date, exceptions: dict | None = None) -> str:
    """Workday/holiday classification with an explicit exception table
    (ISO date string -> class)."""
    if exceptions:
        override = exceptions.get(date.isoformat())
        if override:
            return override
    return "holiday" if date.weekday() >= 5 else "workday"


def assemble_w(model, t0: float, horizon: float, nominations,
               profile_forecasts: dict, intake_pressures: dict,
               temperature: TimeSeries) -> ExogenousInputs:
    """Combine all sources into the exogenous inputs of one horizon.

    ``profile_forecasts`` maps point id -> TimeSeries (Nm3/h);
    ``intake_pressures`` maps pressure-boundary point id -> current value (Pa),
    held constant over the horizon.  Nominations override profile forecasts
    pointwise where both exist; every flow-boundary point must be covered by
    at least one source.
    """
    t1 = t0 + horizon
    nom_by_point = {}
    for n in nominations:
        if n.point_id in nom_by_point:
            raise AssemblyError(f"duplicate nomination for {n.point_id!r}")
        nom_by_point[n.point_id] = n

    demand = {}
    pressure = {}
    provenance = {}
    for e in model.elements:
        if e.kind not in ("intake", "outlet"):
            continue
        pid = e.id
        if pid in intake_pressures:
            pressure[pid] = TimeSeries.constant(intake_pressures[pid], t0, t1)
            provenance[pid] = "hold-last-value"
            continue
        nom = nom_by_point.get(pid)
        prof = profile_forecasts.get(pid)
        if nom is not None and prof is not None:
            # nomination wins pointwise where defined
            if nom.covers(t0, t1):
                demand[pid] = nom.series()
                provenance[pid] = f"nomination({nom.source})"
            else:
                demand[pid] = _merge(nom, prof, t0, t1)
                provenance[pid] = f"nomination({nom.source})+profile"
        elif nom is not None:
            if not nom.covers(t0, t1):
                raise AssemblyError(
                    f"nomination for {pid!r} does not cover the horizon "
                    "and no profile forecast exists")
            demand[pid] = nom.series()
            provenance[pid] = f"nomination({nom.source})"
        elif prof is not None:
            demand[pid] = prof
            provenance[pid] = "profile"
        else:
            raise AssemblyError(f"boundary point {pid!r} covered by no source")

    return ExogenousInputs(t0, horizon, demand, pressure, temperature,
                           provenance)


def _merge(nom: Nomination, prof: TimeSeries, t0: float, t1: float) -> TimeSeries:
    """Pointwise override: nomination value where defined, profile elsewhere."""
    grid = sorted({t0, t1, *(p[0] for p in nom.pieces), *(p[1] for p in nom.pieces),
                   *(t for t in prof.times if t0 < t < t1)})
    times, values = [], []
    for t in grid:
        if t >= t1:
            break
        inside = any(a <= t < b for a, b, _ in nom.pieces)
        values.append(nom.series().at(t) if inside else prof.at(t))
        times.append(t)
    times.append(t1)
    values.append(values[-1])
    return TimeSeries(tuple(times), tuple(values), "previous")
