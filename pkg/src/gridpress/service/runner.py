"""Single planning run: estimate -> forecast -> optimize, with artifacts.

Exit codes: 0 success (violations alone do not fail a run), 2 unusable
scenario (bad refs / bad inputs), 3 simulation divergence.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from ..core.series import TimeSeries
from ..estimation.ingest import ingest
from ..estimation.initial_state import EstimationError, estimate_initial_state
from ..forecast.assemble import AssemblyError, assemble_w
from ..forecast.profiles import forecast_demand
from ..optimizer.repetitive import Plan, repetitive_step
from ..sim.solver import SimulationError
from ..sim.state import ExogenousInputs, SystemState
from .scenario import Scenario, ScenarioError
from .store import DataStore, content_hash

log = logging.getLogger("gridpress.runner")

EXIT_OK = 0
EXIT_BAD_SCENARIO = 2
EXIT_DIVERGED = 3


@dataclass
class PlanInputs:
    model: object
    state: SystemState
    w: ExogenousInputs
    estimation_report: object
    rejections: list
    snapshot_hash: str


def build_plan_inputs(scenario: Scenario, t0: float | None = None,
                      batch=None, activation: dict | None = None) -> PlanInputs:
    """Assemble everything one planning cycle needs.

    ``batch`` overrides the scenario's recorded measurement feed (used by the
    closed loop); ``t0`` defaults to the scenario start.
    """
    t0 = scenario.t0 if t0 is None else t0
    model = scenario.load_model()
    mappings = scenario.load_mappings()

    if batch is None:
        batches = scenario.load_batches()
        if not batches:
            raise ScenarioError("measurement feed is empty")
        usable = [b for b in batches if b.timestamp <= t0 + 1e-9]
        batch = usable[-1] if usable else batches[0]

    measurements, rejections = ingest(batch, mappings)
    for r in rejections:
        log.warning("rejected measurement %s: %s", r.point_id, r.reason)

    state, est_report = estimate_initial_state(
        model, measurements, temp=scenario.temperature,
        max_segment_len=scenario.optimizer.max_segment_len)
    state.time = t0

    temp_series = TimeSeries.constant(scenario.temperature, t0,
                                      t0 + scenario.horizon)
    profile_forecasts = {
        pid: forecast_demand(prof, temp_series, t0, scenario.horizon)
        for pid, prof in scenario.load_profiles().items()}
    intake_pressures = {e.id: state.node_pressure[e.node]
                        for e in model.intakes()}
    w = assemble_w(model, t0, scenario.horizon, scenario.load_nominations(),
                   profile_forecasts, intake_pressures, temp_series)

    snapshot = {
        "scenario": scenario.to_json(),
        "t0": t0,
        "batch_timestamp": batch.timestamp,
        "measurements": sorted((f"{k[0]}/{k[1]}", v)
                               for k, v in measurements.values.items()),
        "activation": dict(activation or {}),
    }
    return PlanInputs(model, state, w, est_report, rejections,
                      content_hash(snapshot))


def plan_once(scenario: Scenario, inputs: PlanInputs,
              prev: Plan | None = None,
              activation: dict | None = None) -> Plan:
    grid = scenario.grid(inputs.w.t0)
    forced = {sid for sid, on in (activation or {}).items() if not on}
    cold = scenario.baseline_control(grid).values if scenario.baseline else None
    plan = repetitive_step(prev, inputs.model, inputs.state, inputs.w, grid,
                           scenario.optimizer, forced_bypass=forced,
                           cold_start=cold)
    plan.lineage["snapshot_hash"] = inputs.snapshot_hash
    return plan


def extract_point_series(plan: Plan, inputs: PlanInputs, mappings) -> dict:
    """Per-measurement-point time series over the plan horizon, for charting.

    Includes the initial state at t0, with ``discard_before`` marking the end
    of the step that state estimation cannot vouch for.
    """
    model = inputs.model
    gas = model.gas
    if plan.trajectory is None:
        return {"points": {}, "discard_before": inputs.w.t0}
    states = [inputs.state] + list(plan.trajectory.states)
    times = [s.time for s in states]
    points = {}
    for m in mappings:
        if m.variable == "pressure":
            values = [s.node_pressure.get(m.target_id) for s in states]
            unit = "Pa"
            if any(v is None for v in values):
                continue
            points[m.point_id] = {"target_id": m.target_id,
                                  "variable": m.variable, "unit": unit,
                                  "times": times, "values": values}
            continue
        try:
            el = model.element(m.target_id)
        except KeyError:
            continue
        if el.kind == "outlet":
            values = [inputs.w.demand[m.target_id].at(t)
                      if m.target_id in inputs.w.demand else None
                      for t in times]
            unit = "Nm3/h"
        elif el.kind == "intake":
            values = [gas.volumetric_flow(s.boundary_inflow) for s in states]
            unit = "Nm3/h"
        else:
            values = [gas.volumetric_flow(s.element_flow.get(m.target_id, 0.0))
                      for s in states]
            unit = "Nm3/h"
        if any(v is None for v in values):
            continue
        points[m.point_id] = {"target_id": m.target_id,
                              "variable": m.variable, "unit": unit,
                              "times": times, "values": values}
    dt = times[1] - times[0] if len(times) > 1 else 0.0
    return {"points": points, "t0": times[0],
            "t_end": times[-1], "discard_before": times[0] + dt}


def write_artifacts(plan: Plan, inputs: PlanInputs, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    p = out / "plan.json"
    p.write_text(json.dumps(plan.to_json(), indent=2))
    paths.append(p)
    p = out / "trajectory.csv"
    p.write_text(plan.trajectory.to_csv() if plan.trajectory else "")
    paths.append(p)
    p = out / "violations.json"
    p.write_text(json.dumps({
        "count": len(plan.violations),
        "violations": plan.violations.to_json(),
        "estimation": inputs.estimation_report.to_json(),
        "rejected_measurements": [
            {"point_id": r.point_id, "reason": r.reason, "raw": r.raw}
            for r in inputs.rejections],
    }, indent=2))
    paths.append(p)
    return paths


def run_scenario(scenario_path, out_dir, budget_evals: int | None = None,
                 budget_seconds: float | None = None,
                 store: DataStore | None = None) -> int:
    """The one-shot CLI entry: returns the process exit code."""
    try:
        scenario = Scenario.load(scenario_path)
        if budget_evals is not None:
            scenario.optimizer.budget_evals = budget_evals
        if budget_seconds is not None:
            scenario.optimizer.budget_seconds = budget_seconds
        inputs = build_plan_inputs(scenario)
    except (ScenarioError, EstimationError, AssemblyError, OSError,
            ValueError) as exc:
        log.error("unusable scenario: %s", exc)
        return EXIT_BAD_SCENARIO

    try:
        plan = plan_once(scenario, inputs)
    except SimulationError as exc:
        log.error("simulation diverged: %s", exc)
        return EXIT_DIVERGED

    write_artifacts(plan, inputs, out_dir)
    if store is not None:
        store.save_plan(plan.to_json(),
                        series=extract_point_series(plan, inputs,
                                                    scenario.load_mappings()))
        store.append_run({
            "plan_id": plan.plan_id,
            "snapshot_hash": inputs.snapshot_hash,
            "t0": inputs.w.t0,
            "evaluations": plan.lineage.get("evaluations"),
            "objective": plan.objective,
            "value": plan.value,
            "decisions": [],
        })
    log.info("plan %s: objective %.1f Nm3, %d violations, %s evaluations",
             plan.plan_id, plan.objective, len(plan.violations),
             plan.lineage.get("evaluations"))
    return EXIT_OK
