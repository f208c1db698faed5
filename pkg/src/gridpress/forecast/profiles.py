"""Daily demand profiles with exponential-smoothing adaptation.

A profile is a 24-hour shape (mean 1), a base daily volume and a linear
temperature sensitivity around a reference temperature.  Learning folds each
observed day into the profile at rate alpha, so the model tracks new
customers or behavioral drift without manual recalibration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

T_REF_DEFAULT = 281.15  # K (8 degC heating threshold convention)


@dataclass(frozen=True)
class DailyProfile:
    outlet_id: str
    shape: tuple                  # 24 hourly coefficients, mean 1
    base_volume: float            # Nm3/day
    temp_slope: float = 0.0       # demand fraction per K below t_ref
    t_ref: float = T_REF_DEFAULT
    calendar_class: str = "workday"
    alpha: float = 0.3            # learning rate in (0, 1]

    def __post_init__(self):
        shape = tuple(float(s) for s in self.shape)
        if len(shape) != 24:
            raise ValueError("shape must have 24 hourly coefficients")
        if any(s <= 0 for s in shape):
            raise ValueError("shape coefficients must be > 0")
        if abs(sum(shape) / 24.0 - 1.0) > 1e-9:
            raise ValueError("shape coefficients must have mean 1")
        if self.base_volume < 0:
            raise ValueError("base volume must be >= 0")
        if not (0 < self.alpha <= 1):
            raise ValueError("alpha must be in (0, 1]")
        object.__setattr__(self, "shape", shape)

    @classmethod
    def flat(cls, outlet_id: str, base_volume: float, **kw) -> "DailyProfile":
        return cls(outlet_id, (1.0,) * 24, base_volume, **kw)

    def hourly_flow(self, hour: int, temp: float) -> float:
        """Expected flow in Nm3/h for the given hour and temperature."""
        factor = 1.0 + self.temp_slope * (self.t_ref - temp)
        return max(0.0, self.base_volume / 24.0 * self.shape[hour % 24] * factor)

    def to_json(self) -> dict:
        return {"outlet_id": self.outlet_id, "shape": list(self.shape),
                "base_volume": self.base_volume, "temp_slope": self.temp_slope,
                "t_ref": self.t_ref, "calendar_class": self.calendar_class,
                "alpha": self.alpha}

    @classmethod
    def from_json(cls, d: dict) -> "DailyProfile":
        return cls(d["outlet_id"], tuple(d["shape"]), d["base_volume"],
                   d.get("temp_slope", 0.0), d.get("t_ref", T_REF_DEFAULT),
                   d.get("calendar_class", "workday"), d.get("alpha", 0.3))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "DailyProfile":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class DayRecord:
    """One observed day: 24 hourly flows (Nm3/h) and temperatures (K)."""

    date: str
    flows: tuple
    temps: tuple
    calendar_class: str = "workday"

    def __post_init__(self):
        if len(self.flows) != 24 or len(self.temps) != 24:
            raise ValueError("day record needs 24 hourly flows and temperatures")
        object.__setattr__(self, "flows", tuple(float(f) for f in self.flows))
        object.__setattr__(self, "temps", tuple(float(t) for t in self.temps))


def _day_update(profile: DailyProfile, day: DayRecord):
    """Implied (base, shape, slope) of one observed day against the prior."""
    f = np.array(day.flows)
    t = np.array(day.temps)
    shape_prior = np.array(profile.shape)

    # shape-weighted mean temperature deviation; total volume then factors as
    # base * (1 + slope * mean_dev)
    dev = profile.t_ref - t
    mean_dev = float(np.dot(shape_prior, dev) / 24.0)
    volume = float(np.sum(f))
    denom = 1.0 + profile.temp_slope * mean_dev
    base_day = volume / denom if denom > 1e-9 else volume

    temp_factor = 1.0 + profile.temp_slope * dev
    temp_factor = np.maximum(temp_factor, 1e-9)
    shape_day = f / temp_factor
    mean = float(np.mean(shape_day))
    shape_day = shape_day / mean if mean > 0 else np.ones(24)
    shape_day = np.maximum(shape_day, 1e-9)

    # slope via least squares of relative residuals on temperature deviation;
    # identifiable only when the day actually has temperature variation
    slope_day = None
    if profile.base_volume > 0 and float(np.dot(dev, dev)) > 1e-12:
        expected = profile.base_volume / 24.0 * shape_prior
        good = expected > 0
        if np.any(good):
            y = f[good] / expected[good] - 1.0
            x = dev[good]
            xx = float(np.dot(x, x))
            if xx > 1e-12:
                slope_day = float(np.dot(x, y) / xx)
    return base_day, shape_day, slope_day


def learn_profile(history, prior: DailyProfile) -> DailyProfile:
    """Fold observed days of the prior's calendar class into the profile.

    Exponential smoothing at the profile's own rate alpha; days of other
    calendar classes are ignored.  Empty history returns the prior unchanged.
    """
    days = [d for d in history if d.calendar_class == prior.calendar_class]
    if not days:
        return prior
    base = prior.base_volume
    shape = np.array(prior.shape)
    slope = prior.temp_slope
    a = prior.alpha
    current = prior
    for day in days:
        base_day, shape_day, slope_day = _day_update(current, day)
        base = (1 - a) * base + a * base_day
        shape = (1 - a) * shape + a * shape_day
        shape = shape / np.mean(shape)
        if slope_day is not None:
            slope = (1 - a) * slope + a * slope_day
        current = replace(current, base_volume=base, shape=tuple(shape),
                          temp_slope=slope)
    return current


def forecast_demand(profile: DailyProfile, temp_forecast, t0: float,
                    horizon: float):
    """Hourly flow series over [t0, t0+horizon] in Nm3/h.

    ``temp_forecast`` is a TimeSeries in K covering the horizon.  Flows are
    clamped at zero.
    """
    from ..core.series import TimeSeries

    if not temp_forecast.covers(t0, t0 + horizon):
        raise ValueError("temperature forecast does not cover the horizon")
    n_hours = int(np.ceil(horizon / 3600.0))
    times, values = [], []
    for h in range(n_hours + 1):
        t = t0 + h * 3600.0
        hour = int(t // 3600.0) % 24
        values.append(profile.hourly_flow(hour, temp_forecast.at(min(t, t0 + horizon))))
        times.append(t)
    return TimeSeries(tuple(times), tuple(values), "previous")
