"""Discrete positional PID with conditional-integration anti-windup.

Derivative acts on the measurement (not the error) so setpoint steps do not
kick the output; the integrator freezes whenever the unclamped output is
saturated in the direction that would wind it up further.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class PidConfig:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    out_min: float = float("-inf")
    out_max: float = float("inf")
    bias: float = 0.0

    def __post_init__(self):
        if self.out_min > self.out_max:
            raise ValueError("out_min must be <= out_max")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    last_measurement: float | None = None
    last_output: float = 0.0
    saturated: bool = False


def pid_update(cfg: PidConfig, state: PidState, setpoint: float,
               measurement: float, dt: float):
    """One controller tick; returns (output, new_state)."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    error = setpoint - measurement

    integral = state.integral
    candidate = integral + cfg.ki * error * dt

    if state.last_measurement is None:
        derivative = 0.0
    else:
        derivative = -cfg.kd * (measurement - state.last_measurement) / dt

    raw = cfg.bias + cfg.kp * error + candidate + derivative
    # conditional integration: accept the new integral only if the output is
    # unsaturated, or the error pushes back inside the limits
    if raw > cfg.out_max and error > 0:
        candidate = integral
        raw = cfg.bias + cfg.kp * error + candidate + derivative
    elif raw < cfg.out_min and error < 0:
        candidate = integral
        raw = cfg.bias + cfg.kp * error + candidate + derivative

    output = min(max(raw, cfg.out_min), cfg.out_max)
    new_state = PidState(candidate, measurement, output, output != raw)
    return output, new_state
