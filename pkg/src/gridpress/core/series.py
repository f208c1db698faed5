"""Small time-series helper shared by forecasting and simulation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TimeSeries:
    """Piecewise series over time in seconds.

    ``interp`` is "linear" or "previous" (zero-order hold).  Queries outside
    the covered span clamp to the nearest endpoint value.
    """

    times: tuple = field(default_factory=tuple)
    values: tuple = field(default_factory=tuple)
    interp: str = "linear"

    def __post_init__(self):
        t = tuple(float(x) for x in self.times)
        v = tuple(float(x) for x in self.values)
        if len(t) != len(v) or not t:
            raise ValueError("times and values must be equal-length, non-empty")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("times must be strictly increasing")
        if self.interp not in ("linear", "previous"):
            raise ValueError("interp must be 'linear' or 'previous'")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, value: float, t0: float = 0.0, t1: float = 1.0) -> "TimeSeries":
        if t1 <= t0:
            t1 = t0 + 1.0
        return cls((t0, t1), (value, value), "previous")

    @property
    def t_start(self) -> float:
        return self.times[0]

    @property
    def t_end(self) -> float:
        return self.times[-1]

    def covers(self, t0: float, t1: float, tol: float = 1e-9) -> bool:
        return self.t_start <= t0 + tol and self.t_end >= t1 - tol

    def at(self, t: float) -> float:
        ts = self.times
        if t <= ts[0]:
            return self.values[0]
        if t >= ts[-1]:
            return self.values[-1]
        i = int(np.searchsorted(ts, t, side="right")) - 1
        if self.interp == "previous":
            return self.values[i]
        t0, t1 = ts[i], ts[i + 1]
        v0, v1 = self.values[i], self.values[i + 1]
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0)

    def sample(self, times) -> np.ndarray:
        return np.array([self.at(t) for t in times])

    def shifted(self, dt: float) -> "TimeSeries":
        return TimeSeries(tuple(t + dt for t in self.times), self.values, self.interp)

    def to_json(self) -> dict:
        return {"times": list(self.times), "values": list(self.values),
                "interp": self.interp}

    @classmethod
    def from_json(cls, d: dict) -> "TimeSeries":
        return cls(tuple(d["times"]), tuple(d["values"]), d.get("interp", "linear"))
