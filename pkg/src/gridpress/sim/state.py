"""State, trajectory, exogenous-input and control containers."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core.series import TimeSeries


@dataclass
class StationOps:
    """Operating point of one compressor station at one instant."""

    mode: str               # "active" | "bypass"
    flow_nm3h: float        # commanded (active) or resulting (bypass) flow
    ratio: float            # discharge/suction pressure (1.0 in bypass)
    suction_p: float        # Pa
    discharge_p: float      # Pa
    fuel_nm3h: float = 0.0

    @property
    def dp(self) -> float:
        return self.discharge_p - self.suction_p

    def to_json(self) -> dict:
        return {"mode": self.mode, "flow_nm3h": self.flow_nm3h,
                "ratio": self.ratio, "suction_p": self.suction_p,
                "discharge_p": self.discharge_p, "fuel_nm3h": self.fuel_nm3h}

    @classmethod
    def from_json(cls, d: dict) -> "StationOps":
        return cls(d["mode"], d["flow_nm3h"], d["ratio"], d["suction_p"],
                   d["discharge_p"], d.get("fuel_nm3h", 0.0))


@dataclass
class SystemState:
    """Full dependent-variable snapshot at one instant.

    ``node_pressure`` covers model nodes and internal pipe cells (keys like
    "P3#2"), so a state can seed a further simulation without information
    loss.  ``element_flow`` is mass flow kg/s keyed by element id.
    """

    time: float
    node_pressure: dict
    element_flow: dict = field(default_factory=dict)
    stations: dict = field(default_factory=dict)   # id -> StationOps
    valve_dp: dict = field(default_factory=dict)   # id -> Pa
    temperature: float = 283.15                    # gas temperature, K
    stored_mass: float = 0.0                       # total linepack, kg
    boundary_inflow: float = 0.0                   # net boundary inflow, kg/s

    def to_json(self) -> dict:
        return {
            "time": self.time,
            "node_pressure": dict(self.node_pressure),
            "element_flow": dict(self.element_flow),
            "stations": {k: v.to_json() for k, v in self.stations.items()},
            "valve_dp": dict(self.valve_dp),
            "temperature": self.temperature,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SystemState":
        return cls(d["time"], dict(d["node_pressure"]),
                   dict(d.get("element_flow", {})),
                   {k: StationOps.from_json(v)
                    for k, v in d.get("stations", {}).items()},
                   dict(d.get("valve_dp", {})), d.get("temperature", 283.15))


@dataclass
class Trajectory:
    """Computed states on a uniform grid, starting at t0 + dt.

    The initial condition is not part of the trajectory; index 0 is the first
    computed step (the one exempted from constraint checks).
    """

    states: list
    dt: float

    def __post_init__(self):
        times = [s.time for s in self.states]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("trajectory timestamps must be strictly increasing")

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    def fuel_rates(self) -> dict:
        """Per-station fuel-rate series (Nm3/h) aligned with the grid."""
        out: dict = {}
        for s in self.states:
            for sid, ops in s.stations.items():
                out.setdefault(sid, []).append(ops.fuel_nm3h)
        return {k: np.array(v) for k, v in out.items()}

    def without_first_step(self) -> "Trajectory":
        if len(self.states) < 2:
            raise ValueError("cannot discard the only step of a trajectory")
        return Trajectory(self.states[1:], self.dt)

    def to_csv(self) -> str:
        """Export as `time_s,element_id,variable,value,unit` rows."""
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["time_s", "element_id", "variable", "value", "unit"])
        for s in self.states:
            for nid, p in s.node_pressure.items():
                if "#" in nid:
                    continue  # internal pipe cells stay internal
                w.writerow([s.time, nid, "pressure", repr(p), "Pa"])
            for eid, m in s.element_flow.items():
                w.writerow([s.time, eid, "mass_flow", repr(m), "kg/s"])
            for sid, ops in s.stations.items():
                w.writerow([s.time, sid, "ratio", repr(ops.ratio), "1"])
                w.writerow([s.time, sid, "fuel_rate", repr(ops.fuel_nm3h), "Nm3/h"])
            for vid, dp in s.valve_dp.items():
                w.writerow([s.time, vid, "dp", repr(dp), "Pa"])
        return buf.getvalue()


@dataclass
class ExogenousInputs:
    """Uncontrolled inputs over the horizon [t0, t0 + horizon]."""

    t0: float
    horizon: float
    demand: dict                     # outlet/interconnect id -> TimeSeries, Nm3/h
    pressure: dict                   # pressure-boundary point id -> TimeSeries, Pa
    temperature: TimeSeries          # gas temperature, K
    provenance: dict = field(default_factory=dict)  # point id -> source tag

    def __post_init__(self):
        t1 = self.t0 + self.horizon
        for pid, ts in {**self.demand, **self.pressure}.items():
            if not ts.covers(self.t0, t1):
                raise ValueError(f"series for {pid!r} does not cover the horizon")
        if not self.temperature.covers(self.t0, t1):
            raise ValueError("temperature series does not cover the horizon")
        for pid, ts in self.demand.items():
            if min(ts.values) < 0:
                raise ValueError(f"negative demand in series for {pid!r}")

    def to_json(self) -> dict:
        return {
            "t0": self.t0, "horizon": self.horizon,
            "demand": {k: v.to_json() for k, v in self.demand.items()},
            "pressure": {k: v.to_json() for k, v in self.pressure.items()},
            "temperature": self.temperature.to_json(),
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_json(cls, d: dict) -> "ExogenousInputs":
        return cls(d["t0"], d["horizon"],
                   {k: TimeSeries.from_json(v) for k, v in d["demand"].items()},
                   {k: TimeSeries.from_json(v) for k, v in d["pressure"].items()},
                   TimeSeries.from_json(d["temperature"]),
                   dict(d.get("provenance", {})))


@dataclass(frozen=True)
class ControlGrid:
    """Discretization of the control: M stations x N steps of length dt."""

    stations: tuple      # station ids, fixed order
    n_steps: int
    dt: float            # control period, s
    t0: float = 0.0

    def __post_init__(self):
        if not self.stations or self.n_steps < 1 or self.dt <= 0:
            raise ValueError("degenerate control grid")
        object.__setattr__(self, "stations", tuple(self.stations))

    @property
    def m(self) -> int:
        return len(self.stations)

    @property
    def size(self) -> int:
        return self.m * self.n_steps

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt

    def index(self, station_id: str, step: int) -> int:
        """Position in the time-major flat layout."""
        return step * self.m + self.stations.index(station_id)

    def step_at(self, t: float) -> int:
        k = int((t - self.t0) / self.dt)
        return min(max(k, 0), self.n_steps - 1)


@dataclass
class ControlVector:
    """Flat, time-major station flow schedule in Nm3/h."""

    grid: ControlGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.size,):
            raise ValueError(f"control vector must have length {self.grid.size}")

    def flow_at(self, station_id: str, t: float) -> float:
        return float(self.values[self.grid.index(station_id, self.grid.step_at(t))])

    def station_series(self, station_id: str) -> np.ndarray:
        j = self.grid.stations.index(station_id)
        return self.values[j::self.grid.m]

    def clipped(self, lower: np.ndarray, upper: np.ndarray) -> "ControlVector":
        return ControlVector(self.grid, np.clip(self.values, lower, upper))

    def copy(self) -> "ControlVector":
        return ControlVector(self.grid, self.values.copy())

    def to_json(self) -> dict:
        return {"stations": list(self.grid.stations), "n_steps": self.grid.n_steps,
                "dt": self.grid.dt, "t0": self.grid.t0,
                "values": [float(v) for v in self.values]}

    @classmethod
    def from_json(cls, d: dict) -> "ControlVector":
        grid = ControlGrid(tuple(d["stations"]), d["n_steps"], d["dt"],
                           d.get("t0", 0.0))
        return cls(grid, np.array(d["values"], dtype=float))


@dataclass(frozen=True)
class Violation:
    element_id: str
    variable: str
    time: float
    bound: str        # "min" | "max"
    limit: float
    value: float

    @property
    def magnitude(self) -> float:
        return abs(self.value - self.limit)

    def to_json(self) -> dict:
        return {"element_id": self.element_id, "variable": self.variable,
                "time": self.time, "bound": self.bound, "limit": self.limit,
                "value": self.value, "magnitude": self.magnitude}


@dataclass
class ViolationReport:
    violations: list = field(default_factory=list)

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __bool__(self):
        return not self.violations

    @property
    def empty(self) -> bool:
        return not self.violations

    def add(self, v: Violation):
        self.violations.append(v)

    def extend(self, other: "ViolationReport"):
        self.violations.extend(other.violations)

    def for_element(self, element_id: str) -> list:
        return [v for v in self.violations if v.element_id == element_id]

    def to_json(self) -> list:
        return [v.to_json() for v in self.violations]
