"""Scenario files: one JSON document tying together a network, a measurement
feed, forecasting inputs and the planning configuration.

All file references are resolved relative to the scenario file itself, so a
scenario directory is relocatable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core.network import NetworkModel
from ..estimation.ingest import load_batch_csv, load_mappings
from ..forecast.assemble import load_nominations
from ..forecast.profiles import DailyProfile
from ..optimizer.penalty import OptimizerConfig
from ..sim.state import ControlGrid, ControlVector


class ScenarioError(ValueError):
    """Unusable scenario document (bad invariants or unresolvable refs)."""


@dataclass
class TruthConfig:
    """Closed-loop truth model settings (testing only)."""
    i1_pressure: float
    i1_ramp_per_hour: float = 0.0     # relative rise per hour, e.g. 0.05
    demands: dict = field(default_factory=dict)  # point id -> Nm3/h override

    def to_json(self) -> dict:
        return {"i1_pressure": self.i1_pressure,
                "i1_ramp_per_hour": self.i1_ramp_per_hour,
                "demands": dict(self.demands)}

    @classmethod
    def from_json(cls, d: dict) -> "TruthConfig":
        return cls(d["i1_pressure"], d.get("i1_ramp_per_hour", 0.0),
                   dict(d.get("demands", {})))


@dataclass
class Scenario:
    name: str
    base_dir: Path
    network: str
    mappings: str
    measurements: str
    nominations: str | None
    profiles: str | None
    t0: float
    horizon: float                    # s
    n_steps: int
    dt_control: float                 # s
    temperature: float                # K
    optimizer: OptimizerConfig
    baseline: dict = field(default_factory=dict)  # station id -> Nm3/h
    truth: TruthConfig | None = None

    def __post_init__(self):
        if self.n_steps < 1:
            raise ScenarioError("n_steps must be >= 1")
        if abs(self.n_steps * self.dt_control - self.horizon) > 1e-6:
            raise ScenarioError(
                f"control grid does not tile the horizon: "
                f"{self.n_steps} * {self.dt_control} != {self.horizon}")
        for ref in self._refs():
            if not self.resolve(ref).exists():
                raise ScenarioError(f"unresolvable file reference: {ref!r}")

    def _refs(self):
        refs = [self.network, self.mappings, self.measurements]
        if self.nominations:
            refs.append(self.nominations)
        if self.profiles:
            refs.append(self.profiles)
        return refs

    def resolve(self, ref: str) -> Path:
        return (self.base_dir / ref).resolve()

    # -- loaders ---------------------------------------------------------

    def load_model(self) -> NetworkModel:
        return NetworkModel.load(self.resolve(self.network))

    def load_mappings(self):
        return load_mappings(self.resolve(self.mappings))

    def load_batches(self):
        return load_batch_csv(self.resolve(self.measurements))

    def load_nominations(self):
        if not self.nominations:
            return []
        return load_nominations(self.resolve(self.nominations))

    def load_profiles(self) -> dict:
        if not self.profiles:
            return {}
        profiles = {}
        for p in sorted(self.resolve(self.profiles).glob("*.json")):
            prof = DailyProfile.load(p)
            profiles[prof.outlet_id] = prof
        return profiles

    def grid(self, t0: float | None = None) -> ControlGrid:
        model = self.load_model()
        stations = tuple(sorted(st.id for st in model.stations()))
        return ControlGrid(stations, self.n_steps, self.dt_control,
                           self.t0 if t0 is None else t0)

    def baseline_control(self, grid: ControlGrid) -> ControlVector:
        row = [self.baseline.get(s, 0.0) for s in grid.stations]
        return ControlVector(grid, np.tile(row, grid.n_steps))

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        d = {"name": self.name, "network": self.network,
             "mappings": self.mappings, "measurements": self.measurements,
             "nominations": self.nominations, "profiles": self.profiles,
             "t0": self.t0, "horizon_s": self.horizon,
             "n_steps": self.n_steps, "dt_control_s": self.dt_control,
             "temperature_k": self.temperature,
             "optimizer": self.optimizer.to_json(),
             "baseline": dict(self.baseline)}
        if self.truth is not None:
            d["truth"] = self.truth.to_json()
        return d

    @classmethod
    def from_json(cls, d: dict, base_dir) -> "Scenario":
        try:
            return cls(
                name=d.get("name", "unnamed"),
                base_dir=Path(base_dir),
                network=d["network"],
                mappings=d["mappings"],
                measurements=d["measurements"],
                nominations=d.get("nominations"),
                profiles=d.get("profiles"),
                t0=float(d.get("t0", 0.0)),
                horizon=float(d["horizon_s"]),
                n_steps=int(d["n_steps"]),
                dt_control=float(d["dt_control_s"]),
                temperature=float(d.get("temperature_k", 283.15)),
                optimizer=OptimizerConfig.from_json(d.get("optimizer", {})),
                baseline=dict(d.get("baseline", {})),
                truth=TruthConfig.from_json(d["truth"]) if "truth" in d else None,
            )
        except KeyError as exc:
            raise ScenarioError(f"scenario missing required field {exc}") from exc

    @classmethod
    def load(cls, path) -> "Scenario":
        path = Path(path)
        if not path.exists():
            raise ScenarioError(f"scenario file not found: {path}")
        try:
            d = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
        return cls.from_json(d, path.parent)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2))
