"""Fuel consumption objective: time integral of summed station fuel rates."""

from __future__ import annotations

import numpy as np


def objective_integral(times_s, fuel_rates: dict) -> float:
    """Integrate total station fuel rate over the given grid.

    ``times_s`` is the simulation time grid in seconds; ``fuel_rates`` maps
    station id -> array of rates in Nm3/h aligned with the grid.  Returns
    total fuel volume in Nm3 (trapezoidal rule).

    The grid is taken as-is: callers wanting the first-step exemption pass
    the discarded trajectory's grid.
    """
    t = np.asarray(times_s, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("need at least two grid points")
    total = np.zeros_like(t)
    for sid, rates in fuel_rates.items():
        r = np.asarray(rates, dtype=float)
        if r.shape != t.shape:
            raise ValueError(f"fuel-rate series for {sid!r} misaligned with grid")
        total += r
    return float(np.trapezoid(total, t / 3600.0))
