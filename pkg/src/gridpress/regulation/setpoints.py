"""Fast regulation layer: plan + live measurements -> pressure setpoints.

Runs on its own cadence (default 10 s), independent of the planner.  The PID
regulates the reduction-valve pressure difference toward its configured
minimum by moving the compressor discharge setpoints; the optimizer's plan
enters only as an additive correction, and a stale plan contributes nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .balance import InfeasibleLoadError, balance_machines
from .pid import PidConfig, PidState, pid_update


@dataclass(frozen=True)
class SetpointRecord:
    timestamp: float
    station: str
    machine: str
    variable: str
    value: float
    unit: str

    def csv_row(self) -> str:
        return f"{self.timestamp},{self.station},{self.machine}," \
               f"{self.variable},{self.value!r},{self.unit}"


@dataclass
class RegulationConfig:
    r1_dp_target: float                  # Pa, minimum dp to hold at the valve
    cadence: float = 10.0                # s
    pid: PidConfig = field(default_factory=lambda: PidConfig(
        kp=0.8, ki=0.02, kd=0.0, out_min=-0.5e6, out_max=0.5e6))
    slew_limit: float = 0.1e6 / 60.0     # Pa/s on discharge setpoints
    stale_after: float = 1800.0          # s, plan older than this is ignored
    p_set_min: float = 0.5e6             # Pa
    p_set_max: float = 8.0e6             # Pa


class Regulator:
    """Periodic control task.  Reads the latest published plan snapshot and
    never blocks on the optimizer."""

    def __init__(self, cfg: RegulationConfig, model):
        self.cfg = cfg
        self.model = model
        self.pid_state = PidState()
        self.last_tick: float | None = None
        self.last_setpoints: dict = {}   # station id -> discharge setpoint
        self.records: list = []

    def tick(self, now: float, plan, r1_dp: float, station_measurements: dict):
        """One regulation step.  Returns the emitted records, or None when
        called faster than the configured cadence."""
        if self.last_tick is not None and now - self.last_tick < self.cfg.cadence - 1e-9:
            return None
        dt = self.cfg.cadence if self.last_tick is None else now - self.last_tick
        self.last_tick = now

        correction_out, self.pid_state = pid_update(
            self.cfg.pid, self.pid_state, self.cfg.r1_dp_target, r1_dp, dt)
        # dp above target -> negative error -> lower discharge setpoints
        base_move = correction_out

        stale = plan is None or (now - plan.created_at) > self.cfg.stale_after
        emitted = []
        for st in self.model.stations():
            meas = station_measurements.get(st.id)
            if meas is None:
                continue
            prev = self.last_setpoints.get(st.id, meas["discharge_p"])
            target = meas["discharge_p"] + base_move

            plan_corr = 0.0
            if not stale:
                planned = _planned_discharge(plan, st.id, now)
                if planned is not None:
                    plan_corr = planned - meas["discharge_p"]
            target += plan_corr

            # clamp and slew-limit
            target = min(max(target, self.cfg.p_set_min), self.cfg.p_set_max)
            max_step = self.cfg.slew_limit * dt
            target = min(max(target, prev - max_step), prev + max_step)
            self.last_setpoints[st.id] = target

            flow = meas.get("flow", 0.0)
            try:
                shares = balance_machines(flow, st.machines) if flow > 0 else \
                    {m.id: 0.0 for m in st.machines}
            except InfeasibleLoadError as exc:
                shares = {m.id: exc.nearest_feasible / len(st.machines)
                          for m in st.machines}
            for m in st.machines:
                emitted.append(SetpointRecord(now, st.id, m.id,
                                              "discharge_pressure", target, "Pa"))
                emitted.append(SetpointRecord(now, st.id, m.id,
                                              "flow", shares[m.id], "Nm3/h"))
        if stale and plan is not None:
            emitted.append(SetpointRecord(now, "-", "-", "stale_plan",
                                          now - plan.created_at, "s"))
        self.records.extend(emitted)
        return emitted


def _planned_discharge(plan, station_id: str, t: float):
    traj = plan.trajectory
    if traj is None or not len(traj):
        return None
    # nearest trajectory state at or after t (clamped to the horizon)
    best = None
    for s in traj.states:
        if s.time >= t:
            best = s
            break
    if best is None:
        best = traj.states[-1]
    ops = best.stations.get(station_id)
    return ops.discharge_p if ops is not None else None
