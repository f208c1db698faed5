"""Repetitive control loop: re-estimate, re-plan every interval, apply the
first portion of each plan to the (real or simulated) process.

For closed-loop testing the process is a truth model: the same simulator run
on exogenous inputs that may deviate from the forecast (e.g. an intake
pressure ramp).  Measurements are synthesized from truth states by inverting
the mapping database, so the whole estimation path is exercised.

A failed planning cycle keeps the previous plan active (degraded mode) and
flags the run record.  The regulation task ticks at its own cadence in
simulated time and never waits for the planner.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..core.objective import objective_integral
from ..core.series import TimeSeries
from ..estimation.ingest import MeasurementBatch
from ..forecast.profiles import forecast_demand
from ..regulation.setpoints import RegulationConfig, Regulator
from ..sim.solver import SimulationError, check_constraints, simulate
from ..sim.state import ControlVector, ExogenousInputs, ViolationReport
from .runner import build_plan_inputs, plan_once
from .scenario import Scenario
from .store import DataStore

log = logging.getLogger("gridpress.loop")


class TruthModel:
    """The simulated process the loop closes against."""

    def __init__(self, scenario: Scenario, t_start: float, t_end: float):
        if scenario.truth is None:
            raise ValueError("scenario has no truth model configured")
        self.scenario = scenario
        self.model = scenario.load_model()
        self.mappings = scenario.load_mappings()
        self.cfg = scenario.truth
        self.t_start = t_start
        self.w = self._build_w(t_start, t_end)
        self.state = None   # set by ControlLoop.settle()
        self.dt_sim = 300.0  # truth resolution, finer than the planner's

    def _build_w(self, t0: float, t1: float) -> ExogenousInputs:
        sc = self.scenario
        temp = TimeSeries.constant(sc.temperature, t0, t1)
        demand = {}
        for pid, prof in sc.load_profiles().items():
            demand[pid] = forecast_demand(prof, temp, t0, t1 - t0)
        for nom in sc.load_nominations():
            demand[nom.point_id] = nom.series()
        for pid, flow in self.cfg.demands.items():
            demand[pid] = TimeSeries.constant(flow, t0, t1)
        # intake pressure with optional relative ramp (anchored at t_start)
        times = np.linspace(t0, t1, 200)
        elapsed_h = np.maximum(0.0, times - self.t_start) / 3600.0
        p = self.cfg.i1_pressure * (1.0 + self.cfg.i1_ramp_per_hour * elapsed_h)
        pressure = {e.id: TimeSeries(tuple(times), tuple(p))
                    for e in self.model.intakes()}
        return ExogenousInputs(t0, t1 - t0, demand, pressure, temp)

    def window(self, t0: float, horizon: float) -> ExogenousInputs:
        return ExogenousInputs(t0, horizon, self.w.demand, self.w.pressure,
                               self.w.temperature, self.w.provenance)

    def advance(self, control: ControlVector, t0: float, dt: float):
        """Simulate the process over [t0, t0+dt] under the applied control."""
        traj, _ = simulate(self.model, self.state, control,
                           self.window(t0, dt),
                           dt_sim=min(self.dt_sim, dt),
                           max_segment_len=self.scenario.optimizer.max_segment_len)
        self.state = traj.states[-1]
        return traj

    def measure(self, t: float) -> MeasurementBatch:
        """Raw SCADA batch from the current truth state (mapping-inverted)."""
        st = self.state
        gas = self.model.gas
        readings = []
        for m in self.mappings:
            if m.variable == "pressure":
                si = st.node_pressure.get(m.target_id)
            else:
                el = self.model.element(m.target_id)
                if el is None:
                    si = None
                elif el.kind == "outlet":
                    si = self.w.demand[m.target_id].at(t)
                elif el.kind == "intake":
                    si = gas.volumetric_flow(st.boundary_inflow)
                else:
                    si = gas.volumetric_flow(st.element_flow.get(m.target_id, 0.0))
            if si is None:
                continue
            readings.append((m.point_id, (si - m.offset) / m.scale))
        return MeasurementBatch(t, tuple(readings))


@dataclass
class CycleRecord:
    cycle: int
    t0: float
    plan_id: str | None
    degraded: bool
    reason: str = ""
    objective: float | None = None
    value: float | None = None
    evaluations: int | None = None


@dataclass
class LoopResult:
    cycles: list = field(default_factory=list)
    fuel_consumed: float = 0.0             # Nm3, integrated over truth
    violations: ViolationReport = field(default_factory=ViolationReport)
    setpoint_records: list = field(default_factory=list)

    @property
    def degraded_cycles(self):
        return [c for c in self.cycles if c.degraded]


class ControlLoop:
    def __init__(self, scenario: Scenario, store: DataStore | None = None,
                 interval: float = 900.0,
                 regulation: RegulationConfig | None = None,
                 fault_injector=None):
        if interval <= 0:
            raise ValueError("interval must be > 0")
        self.scenario = scenario
        self.store = store
        self.interval = interval
        self.regulation_cfg = regulation or RegulationConfig(
            r1_dp_target=0.15e6)
        self.fault_injector = fault_injector
        self.plan = None

    def settle(self, truth: TruthModel, hours: float = 48.0):
        """Bring the truth model onto its periodic orbit: run the history
        window [t0-hours, t0] under baseline control from a flat start."""
        from ..sim.state import ControlGrid, SystemState
        t0 = truth.t_start
        w = truth._build_w(t0 - hours * 3600.0, t0)
        grid = ControlGrid(self.scenario.grid(t0).stations, 1,
                           hours * 3600.0, t0 - hours * 3600.0)
        flat = SystemState(w.t0, {n.id: truth.cfg.i1_pressure
                                  for n in truth.model.nodes})
        traj, _ = simulate(truth.model, flat,
                           self.scenario.baseline_control(grid), w)
        truth.state = traj.states[-1]
        truth.state.time = t0

    def run(self, duration: float, fixed_control: ControlVector | None = None,
            settle_hours: float = 48.0) -> LoopResult:
        """Run the closed loop over ``duration`` seconds of simulated time.

        ``fixed_control`` freezes the applied schedule (baseline mode, no
        planning); otherwise each cycle re-plans and applies its first
        portion.
        """
        sc = self.scenario
        t0 = sc.t0
        n_cycles = int(round(duration / self.interval))
        truth = TruthModel(sc, t0, t0 + duration + sc.horizon)
        self.settle(truth, settle_hours)

        regulator = Regulator(self.regulation_cfg, truth.model)
        self._valve_ids = [e.id for e in truth.model.elements
                           if e.kind == "controlled_valve"]
        result = LoopResult()
        activation = self.store.activation_map() if self.store else {}

        for k in range(n_cycles):
            t = t0 + k * self.interval
            degraded, reason = False, ""
            if fixed_control is None:
                try:
                    if self.fault_injector is not None:
                        self.fault_injector(k)
                    batch = truth.measure(t)
                    if self.store is not None:
                        activation = self.store.activation_map()
                    inputs = build_plan_inputs(sc, t0=t, batch=batch,
                                               activation=activation)
                    plan = plan_once(sc, inputs, prev=self.plan,
                                     activation=activation)
                    self.plan = plan
                    if self.store is not None:
                        from .runner import extract_point_series
                        self.store.save_plan(
                            plan.to_json(),
                            series=extract_point_series(plan, inputs,
                                                        truth.mappings))
                except Exception as exc:   # degraded mode: keep previous plan
                    degraded, reason = True, f"{type(exc).__name__}: {exc}"
                    log.warning("cycle %d degraded (%s), keeping plan %s",
                                k, reason,
                                self.plan.plan_id if self.plan else None)
                applied = self.plan.control if self.plan else \
                    sc.baseline_control(sc.grid(t))
            else:
                applied = fixed_control

            traj = truth.advance(applied, t, self.interval)
            result.violations.extend(
                check_constraints(traj, truth.model.constraints,
                                  skip_first=(k == 0)))
            result.fuel_consumed += objective_integral(
                np.concatenate(([t], traj.times)),
                {sid: np.concatenate(([series[0]], series))
                 for sid, series in traj.fuel_rates().items()})

            self._regulate(regulator, traj, t, result)

            rec = CycleRecord(k, t,
                              self.plan.plan_id if self.plan else None,
                              degraded, reason)
            if self.plan is not None and not degraded:
                rec.objective = self.plan.objective
                rec.value = self.plan.value
                rec.evaluations = self.plan.lineage.get("evaluations")
            result.cycles.append(rec)
            if self.store is not None:
                self.store.append_run({
                    "cycle": k, "t0": t, "plan_id": rec.plan_id,
                    "degraded": degraded, "reason": reason,
                    "objective": rec.objective, "value": rec.value,
                    "evaluations": rec.evaluations,
                    "snapshot_hash": self.plan.lineage.get("snapshot_hash")
                    if self.plan else None,
                    "decisions": sorted(activation.items()),
                })
        return result

    def _regulate(self, regulator: Regulator, traj, t_start: float,
                  result: LoopResult):
        """Tick the regulation task through the interval in simulated time,
        feeding it the nearest truth state."""
        valve_ids = self._valve_ids
        cadence = regulator.cfg.cadence
        n_ticks = int(self.interval // cadence)
        times = traj.times
        for j in range(n_ticks):
            t = t_start + j * cadence
            i = int(np.searchsorted(times, t, side="right"))
            st = traj.states[min(max(i - 1, 0), len(traj) - 1)]
            dp = st.valve_dp.get(valve_ids[0], 0.0) if valve_ids else 0.0
            meas = {sid: {"discharge_p": ops.discharge_p,
                          "flow": ops.flow_nm3h}
                    for sid, ops in st.stations.items()
                    if ops.mode == "active"}
            out = regulator.tick(t, self.plan, dp, meas)
            if out:
                result.setpoint_records.extend(out)
