"""Command line interface."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from ..core.network import NetworkModel, validate_network
from ..sim.solver import SimulationError, check_constraints, simulate
from .loop import ControlLoop
from .runner import (EXIT_BAD_SCENARIO, EXIT_DIVERGED, build_plan_inputs,
                     run_scenario)
from .scenario import Scenario, ScenarioError
from .store import DataStore


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose):
    """Gas transmission network control workbench."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s")


@main.command()
@click.argument("network_file", type=click.Path(exists=True))
def validate(network_file):
    """Check a network file for structural problems."""
    try:
        model = NetworkModel.load(network_file)
    except (ValueError, KeyError) as exc:
        click.echo(f"unreadable network: {exc}", err=True)
        sys.exit(1)
    report = validate_network(model)
    if report.ok:
        click.echo(f"ok: {len(model.nodes)} nodes, "
                   f"{len(model.elements)} elements")
    else:
        for eid, msg in report.violations:
            click.echo(f"{eid}: {msg}", err=True)
        sys.exit(1)


def _load_scenario(path) -> Scenario:
    try:
        return Scenario.load(path)
    except ScenarioError as exc:
        click.echo(f"unusable scenario: {exc}", err=True)
        sys.exit(EXIT_BAD_SCENARIO)


@main.command("simulate")
@click.argument("scenario_file", type=click.Path())
@click.option("--out", type=click.Path(), default="out",
              help="Artifact directory.")
def simulate_cmd(scenario_file, out):
    """Simulate the scenario baseline over its horizon."""
    sc = _load_scenario(scenario_file)
    try:
        inputs = build_plan_inputs(sc)
        control = sc.baseline_control(sc.grid(inputs.w.t0))
        traj, report = simulate(inputs.model, inputs.state, control, inputs.w,
                                dt_sim=sc.optimizer.dt_sim)
    except SimulationError as exc:
        click.echo(f"simulation diverged: {exc}", err=True)
        sys.exit(EXIT_DIVERGED)
    except Exception as exc:
        click.echo(f"unusable scenario: {exc}", err=True)
        sys.exit(EXIT_BAD_SCENARIO)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trajectory.csv").write_text(traj.to_csv())
    (out / "violations.json").write_text(json.dumps(report.to_json(), indent=2))
    click.echo(f"{len(traj)} steps, {len(report)} violations -> {out}")


@main.command()
@click.argument("scenario_file", type=click.Path())
@click.option("--out", type=click.Path(), default=None,
              help="Write the estimated state JSON here.")
def estimate(scenario_file, out):
    """Estimate the current system state from the measurement feed."""
    sc = _load_scenario(scenario_file)
    try:
        inputs = build_plan_inputs(sc)
    except Exception as exc:
        click.echo(f"estimation failed: {exc}", err=True)
        sys.exit(EXIT_BAD_SCENARIO)
    doc = {"state": inputs.state.to_json(),
           "estimation": inputs.estimation_report.to_json(),
           "rejections": [{"point_id": r.point_id, "reason": r.reason}
                          for r in inputs.rejections]}
    if out:
        Path(out).write_text(json.dumps(doc, indent=2))
        click.echo(f"state -> {out}")
    else:
        click.echo(json.dumps(doc, indent=2))


@main.command()
@click.argument("scenario_file", type=click.Path())
@click.option("--out", type=click.Path(), default="out",
              help="Artifact directory.")
@click.option("--budget-evals", type=int, default=None)
@click.option("--budget-seconds", type=float, default=None)
@click.option("--data-dir", type=click.Path(), default=None,
              help="Persistence root (defaults to $GRIDPRESS_DATA_DIR).")
def optimize(scenario_file, out, budget_evals, budget_seconds, data_dir):
    """Run one planning cycle: estimate, forecast, optimize."""
    store = DataStore(data_dir)
    sys.exit(run_scenario(scenario_file, out, budget_evals=budget_evals,
                          budget_seconds=budget_seconds, store=store))


@main.command("control-loop")
@click.argument("scenario_file", type=click.Path())
@click.option("--interval", type=float, default=900.0,
              help="Replanning interval, seconds of simulated time.")
@click.option("--duration", type=float, default=6 * 3600.0,
              help="Loop duration, seconds of simulated time.")
@click.option("--baseline", is_flag=True,
              help="Freeze flows at the scenario baseline (no planning).")
@click.option("--data-dir", type=click.Path(), default=None)
def control_loop(scenario_file, interval, duration, baseline, data_dir):
    """Closed-loop repetitive control against the scenario truth model."""
    sc = _load_scenario(scenario_file)
    if sc.truth is None:
        click.echo("scenario has no truth model; control-loop needs one",
                   err=True)
        sys.exit(EXIT_BAD_SCENARIO)
    if interval <= 0:
        click.echo("interval must be > 0", err=True)
        sys.exit(EXIT_BAD_SCENARIO)
    loop = ControlLoop(sc, store=DataStore(data_dir), interval=interval)
    fixed = sc.baseline_control(sc.grid(sc.t0)) if baseline else None
    result = loop.run(duration, fixed_control=fixed)
    click.echo(f"fuel consumed: {result.fuel_consumed:.1f} Nm3")
    click.echo(f"violations: {len(result.violations)}")
    click.echo(f"degraded cycles: {len(result.degraded_cycles)}"
               f" of {len(result.cycles)}")


@main.command()
@click.argument("scenario_file", type=click.Path())
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8080)
@click.option("--data-dir", type=click.Path(), default=None)
def serve(scenario_file, host, port, data_dir):
    """Serve the dispatcher HTTP API."""
    import uvicorn

    from .api import create_app
    sc = _load_scenario(scenario_file)
    app = create_app(sc, DataStore(data_dir))
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
