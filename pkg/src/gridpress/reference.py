"""Bundled reference scenario: a regional grid with one major intake (I1),
two compressor stations on parallel routes (C1 thick, C2 thin), a reduction
valve (R1) feeding the city branch, and three interconnection points
(X1..X3, X3 behind the simple valve V1).

All downstream tooling (tests, CLI demo, acceptance benchmark) builds its
inputs from here.
"""

from __future__ import annotations

import numpy as np

from .core.gas import METHANE_LIKE
from .core.network import (CompressorStation, ConstraintSet, ControlledValve,
                           Intake, Machine, NetworkModel, Node, Outlet, Pipe,
                           SimpleValve)
from .core.series import TimeSeries
from .estimation.ingest import MeasurementBatch, MeasurementMapping
from .forecast.assemble import Nomination
from .forecast.profiles import DailyProfile
from .sim.solver import simulate
from .sim.state import ControlGrid, ControlVector, ExogenousInputs, SystemState

I1_PRESSURE = 3.6e6      # Pa
GAS_TEMP = 283.15        # K
BASELINE_C1 = 210_000.0  # Nm3/h
BASELINE_C2 = 100_000.0  # Nm3/h

# average design demands, Nm3/h
DESIGN_DEMANDS = {
    "OutCity": 150_000.0,
    "OutA": 20_000.0,
    "OutB": 20_000.0,
    "OutE": 10_000.0,
    "X1": 60_000.0,
    "X2": 30_000.0,
    "X3": 20_000.0,
}

ROUGHNESS = 1.5e-5  # m


def build_model() -> NetworkModel:
    nodes = [Node(n) for n in
             ["N1", "N2", "N3", "N4", "N5", "N6", "N7", "N8", "N9", "N10",
              "N11", "N12", "N13", "N16", "N17", "N18", "N20"]]

    def mk_machines(prefix, f_min, f_max, h_max, eta_ad, eta_dr, odos):
        return tuple(Machine(f"{prefix}-M{i + 1}", f_min, f_max, h_max,
                             eta_ad, eta_dr, odo)
                     for i, odo in enumerate(odos))

    elements = [
        Pipe("P1", "N1", "N2", 0.65, 15e3, ROUGHNESS),
        Pipe("P2", "N3", "N4", 0.65, 40e3, ROUGHNESS),
        Pipe("P3", "N4", "N5", 0.65, 40e3, ROUGHNESS),
        Pipe("P4", "N1", "N6", 0.40, 12e3, ROUGHNESS),
        Pipe("P5", "N7", "N8", 0.40, 35e3, ROUGHNESS),
        Pipe("P6", "N8", "N5", 0.40, 30e3, ROUGHNESS),
        Pipe("P7", "N9", "N10", 0.50, 10e3, ROUGHNESS),
        Pipe("P8", "N5", "N11", 0.50, 30e3, ROUGHNESS),
        Pipe("P9", "N11", "N12", 0.50, 25e3, ROUGHNESS),
        Pipe("P10", "N11", "N13", 0.40, 25e3, ROUGHNESS),
        Pipe("P11", "N16", "N17", 0.40, 18e3, ROUGHNESS),
        Pipe("P12", "N9", "N18", 0.30, 8e3, ROUGHNESS),
        Pipe("P13", "N4", "N8", 0.40, 25e3, ROUGHNESS),
        Pipe("P14", "N13", "N20", 0.40, 10e3, ROUGHNESS),
        CompressorStation(
            "C1", "N2", "N3",
            mk_machines("C1", 20_000.0, 120_000.0, 1.55, 0.80, 0.34,
                        (12_000.0, 11_500.0, 9_800.0)),
            min_dp=2.0e4, bypass_coefficient=3e-5),
        CompressorStation(
            "C2", "N6", "N7",
            mk_machines("C2", 15_000.0, 80_000.0, 1.60, 0.74, 0.30,
                        (8_000.0, 9_100.0, 7_600.0)),
            min_dp=2.0e4, bypass_coefficient=3e-5),
        ControlledValve("R1", "N5", "N9", "open", 3e-5),
        SimpleValve("V1", "N12", "N16", True, 2e-5),
        Intake("I1", "N1"),
        Outlet("OutCity", "N10"),
        Outlet("OutA", "N4"),
        Outlet("OutB", "N8"),
        Outlet("OutE", "N18"),
        Outlet("X1", "N12"),
        Outlet("X2", "N20"),
        Outlet("X3", "N17"),
    ]

    constraints = ConstraintSet(
        default_pressure=(1.0e6, 8.0e6),
        node_pressure={
            "N10": (3.55e6, 8.0e6),
            "N12": (3.60e6, 8.0e6),
            "N20": (3.62e6, 8.0e6),
            "N17": (3.58e6, 8.0e6),
            "N5": (3.80e6, 8.0e6),
            "N9": (3.65e6, 8.0e6),
        },
        station_ratio={"C1": (1.0, 1.55), "C2": (1.0, 1.60)},
        other={("C1", "dp"): (2.0e4, 4.0e6), ("C2", "dp"): (2.0e4, 4.0e6)},
    )
    return NetworkModel(nodes, elements, METHANE_LIKE, constraints,
                        anchor_priority=["N1", "N5", "N9"])


def control_grid(t0: float = 0.0, n_steps: int = 8,
                 dt: float = 3 * 3600.0) -> ControlGrid:
    return ControlGrid(("C1", "C2"), n_steps, dt, t0)


def baseline_control(grid: ControlGrid) -> ControlVector:
    values = np.tile([BASELINE_C1, BASELINE_C2], grid.n_steps)
    return ControlVector(grid, values)


def design_w(t0: float = 0.0, horizon: float = 24 * 3600.0,
             demands: dict | None = None,
             i1_pressure: float = I1_PRESSURE) -> ExogenousInputs:
    """Constant exogenous inputs at the design point."""
    demands = demands or DESIGN_DEMANDS
    t1 = t0 + horizon
    return ExogenousInputs(
        t0, horizon,
        demand={k: TimeSeries.constant(v, t0, t1) for k, v in demands.items()},
        pressure={"I1": TimeSeries.constant(i1_pressure, t0, t1)},
        temperature=TimeSeries.constant(GAS_TEMP, t0, t1))


def periodic_w(t0: float, hours: float,
               i1_pressure: float = I1_PRESSURE) -> ExogenousInputs:
    """Profile-shaped exogenous inputs over [t0, t0+hours] (daily periodic)."""
    from .forecast.profiles import forecast_demand

    t1 = t0 + hours * 3600.0
    temp = TimeSeries.constant(GAS_TEMP, t0, t1)
    demand = {pid: forecast_demand(prof, temp, t0, hours * 3600.0)
              for pid, prof in build_profiles().items()}
    for pid in ("X1", "X2", "X3"):
        demand[pid] = TimeSeries.constant(DESIGN_DEMANDS[pid], t0, t1)
    return ExogenousInputs(t0, hours * 3600.0, demand,
                           {"I1": TimeSeries.constant(i1_pressure, t0, t1)},
                           temp)


def settled_state(model: NetworkModel, hours: float = 48.0) -> SystemState:
    """The reference initial condition: the network's periodic orbit under
    baseline control and profile-shaped demands, sampled at hour 0."""
    t_start = -hours * 3600.0
    grid = ControlGrid(("C1", "C2"), 1, hours * 3600.0, t_start)
    control = ControlVector(grid, np.array([BASELINE_C1, BASELINE_C2]))
    w = periodic_w(t_start, hours)
    flat = SystemState(t_start, {n.id: I1_PRESSURE for n in model.nodes})
    traj, _ = simulate(model, flat, control, w)
    state = traj.states[-1]
    state.time = 0.0
    return state


def build_profiles() -> dict:
    """Daily profiles for the non-nominated outlets."""
    hours = np.arange(24)
    city_shape = 1.0 + 0.18 * np.sin((hours - 6) / 24.0 * 2 * np.pi)
    city_shape = city_shape / city_shape.mean()
    profiles = {
        "OutCity": DailyProfile("OutCity", tuple(city_shape),
                                DESIGN_DEMANDS["OutCity"] * 24.0,
                                temp_slope=0.015),
        "OutA": DailyProfile.flat("OutA", DESIGN_DEMANDS["OutA"] * 24.0,
                                  temp_slope=0.01),
        "OutB": DailyProfile.flat("OutB", DESIGN_DEMANDS["OutB"] * 24.0,
                                  temp_slope=0.01),
        "OutE": DailyProfile.flat("OutE", DESIGN_DEMANDS["OutE"] * 24.0),
    }
    return profiles


def build_nominations(t0: float, horizon: float) -> list:
    return [Nomination(pid, ((t0, t0 + horizon, DESIGN_DEMANDS[pid]),),
                       source="dispatcher")
            for pid in ("X1", "X2", "X3")]


def build_mappings() -> list:
    """Mapping database exercising the unit quirks seen in the field:
    flows from the exchange points arrive in kNm3/h, the intake pressure
    transmitter reports gauge MPa."""
    maps = [
        MeasurementMapping("PT-N1", "N1", "pressure", 1.0e6, 1.0e5,
                           0.1e6, 9.0e6, "Pa"),           # gauge MPa -> Pa abs
        MeasurementMapping("PT-N5", "N5", "pressure", 1.0e6, 0.0,
                           0.1e6, 9.0e6, "Pa"),
        MeasurementMapping("PT-N9", "N9", "pressure", 1.0e6, 0.0,
                           0.1e6, 9.0e6, "Pa"),
        MeasurementMapping("PT-N4", "N4", "pressure", 1.0e6, 0.0,
                           0.1e6, 9.0e6, "Pa"),           # redundant
        MeasurementMapping("FT-I1", "I1", "flow", 1000.0, 0.0,
                           -1.0e6, 1.0e6, "Nm3/h"),       # kNm3/h point
        MeasurementMapping("FT-C1", "C1", "flow", 1000.0, 0.0,
                           -1.0e6, 1.0e6, "Nm3/h"),
        MeasurementMapping("FT-C2", "C2", "flow", 1000.0, 0.0,
                           -1.0e6, 1.0e6, "Nm3/h"),
        MeasurementMapping("FT-R1", "R1", "flow", 1000.0, 0.0,
                           -1.0e6, 1.0e6, "Nm3/h"),
    ]
    for pid in DESIGN_DEMANDS:
        maps.append(MeasurementMapping(f"FT-{pid}", pid, "flow", 1.0, 0.0,
                                       0.0, 1.0e6, "Nm3/h"))
    return maps


def write_scenario_bundle(directory, with_truth: bool = True,
                          i1_ramp_per_hour: float = 0.0,
                          budget_evals: int = 150,
                          n_steps: int = 6, dt_control: float = 4 * 3600.0,
                          state: SystemState | None = None) -> "Path":
    """Write the complete runnable scenario directory; returns the path of
    the scenario file."""
    import json
    from pathlib import Path

    from .estimation.ingest import save_mappings
    from .forecast.assemble import save_nominations

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    model = build_model()
    model.save(directory / "network.json")
    save_mappings(build_mappings(), directory / "mappings.json")

    horizon = n_steps * dt_control
    save_nominations(build_nominations(-7 * 86400.0, 14 * 86400.0),
                     directory / "nominations.json")
    prof_dir = directory / "profiles"
    prof_dir.mkdir(exist_ok=True)
    for pid, prof in build_profiles().items():
        prof.save(prof_dir / f"{pid}.json")

    if state is None:
        state = settled_state(model)
    batch = batch_from_state(state, model, timestamp=0.0)
    lines = ["timestamp,point_id,value"]
    lines += [f"{batch.timestamp},{pid},{val!r}" for pid, val in batch.readings]
    (directory / "measurements.csv").write_text("\n".join(lines) + "\n")

    doc = {
        "name": "reference",
        "network": "network.json",
        "mappings": "mappings.json",
        "measurements": "measurements.csv",
        "nominations": "nominations.json",
        "profiles": "profiles",
        "t0": 0.0,
        "horizon_s": horizon,
        "n_steps": n_steps,
        "dt_control_s": dt_control,
        "temperature_k": GAS_TEMP,
        "optimizer": {"budget_evals": budget_evals, "budget_seconds": 600.0,
                      "default_weight": 1.0e8, "dt_sim": 1800.0,
                      "tol_line": 1e-4, "q_rel": 2e-3},
        "baseline": {"C1": BASELINE_C1, "C2": BASELINE_C2},
    }
    if with_truth:
        doc["truth"] = {"i1_pressure": I1_PRESSURE,
                        "i1_ramp_per_hour": i1_ramp_per_hour}
    path = directory / "scenario.json"
    path.write_text(json.dumps(doc, indent=2))
    return path


def batch_from_state(state: SystemState, model: NetworkModel,
                     demands: dict | None = None,
                     timestamp: float | None = None) -> MeasurementBatch:
    """Synthesize raw SCADA readings from a truth state, inverting the unit
    conversions of the mapping database."""
    gas = model.gas
    demands = demands or DESIGN_DEMANDS
    ts = state.time if timestamp is None else timestamp
    readings = [
        ("PT-N1", (state.node_pressure["N1"] - 1.0e5) / 1.0e6),
        ("PT-N5", state.node_pressure["N5"] / 1.0e6),
        ("PT-N9", state.node_pressure["N9"] / 1.0e6),
        ("PT-N4", state.node_pressure["N4"] / 1.0e6),
        ("FT-C1", gas.volumetric_flow(state.element_flow["C1"]) / 1000.0),
        ("FT-C2", gas.volumetric_flow(state.element_flow["C2"]) / 1000.0),
        ("FT-R1", gas.volumetric_flow(state.element_flow["R1"]) / 1000.0),
    ]
    total = sum(demands.values())
    readings.append(("FT-I1", total / 1000.0))
    for pid, flow in demands.items():
        readings.append((f"FT-{pid}", flow))
    return MeasurementBatch(ts, tuple(readings))
