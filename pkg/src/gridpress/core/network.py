"""Network graph model: nodes, elements, constraints, validation and JSON I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .gas import GasSpec

DEFAULT_P_MAX = 8.0e6  # network-wide ceiling unless overridden, Pa


@dataclass(frozen=True)
class Node:
    id: str
    elevation: float = 0.0  # m


@dataclass(frozen=True)
class Pipe:
    id: str
    from_node: str
    to_node: str
    diameter: float      # m
    length: float        # m
    roughness: float     # equivalent sand roughness, m
    segments: int = 0    # 0 -> auto from max segment length

    kind = "pipe"


@dataclass(frozen=True)
class Machine:
    id: str
    f_min: float          # Nm3/h
    f_max: float          # Nm3/h
    h_max: float          # max compression ratio
    eta_ad: float         # adiabatic efficiency
    eta_dr: float         # driver efficiency
    odometer: float = 0.0  # running hours


@dataclass(frozen=True)
class CompressorStation:
    id: str
    from_node: str
    to_node: str
    machines: tuple
    bypass_allowed: bool = True
    min_dp: float = 0.0            # Pa, minimum rise preconditioning operation
    cooler_temp: float = 288.15    # K, discharge temperature after cooling
    bypass_coefficient: float = 2e-6  # kg/s per sqrt(Pa^2) through open bypass

    kind = "station"

    @property
    def f_min(self) -> float:
        """Smallest flow the station can run at (one machine at its minimum)."""
        return min(m.f_min for m in self.machines)

    @property
    def f_max(self) -> float:
        return sum(m.f_max for m in self.machines)

    @property
    def h_max(self) -> float:
        return max(m.h_max for m in self.machines)


@dataclass(frozen=True)
class ControlledValve:
    id: str
    from_node: str
    to_node: str
    mode: str = "open"             # "open" | "closed"
    flow_coefficient: float = 2e-6  # kg/s per sqrt(Pa^2)

    kind = "controlled_valve"


@dataclass(frozen=True)
class SimpleValve:
    id: str
    from_node: str
    to_node: str
    open: bool = True
    flow_coefficient: float = 2e-6

    kind = "simple_valve"


@dataclass(frozen=True)
class Intake:
    id: str
    node: str

    kind = "intake"


@dataclass(frozen=True)
class Outlet:
    id: str
    node: str

    kind = "outlet"


EDGE_KINDS = ("pipe", "station", "controlled_valve", "simple_valve")


@dataclass
class ConstraintSet:
    """Box bounds on dependent variables.

    ``node_pressure`` maps node id -> (lo, hi) Pa; missing nodes fall back to
    the network default.  ``station_ratio`` maps station id -> (lo, hi).
    ``other`` maps (element id, variable name) -> (lo, hi) for any further
    dependent variable.
    """

    default_pressure: tuple = (1.0e5, DEFAULT_P_MAX)
    node_pressure: dict = field(default_factory=dict)
    station_ratio: dict = field(default_factory=dict)
    other: dict = field(default_factory=dict)

    def pressure_bounds(self, node_id: str) -> tuple:
        return self.node_pressure.get(node_id, self.default_pressure)

    def ratio_bounds(self, station_id: str) -> Optional[tuple]:
        return self.station_ratio.get(station_id)

    def all_pairs(self):
        yield ("*", "pressure", self.default_pressure)
        for n, b in self.node_pressure.items():
            yield (n, "pressure", b)
        for s, b in self.station_ratio.items():
            yield (s, "ratio", b)
        for (e, v), b in self.other.items():
            yield (e, v, b)

    def to_json(self) -> dict:
        return {
            "default_pressure": list(self.default_pressure),
            "node_pressure": {k: list(v) for k, v in self.node_pressure.items()},
            "station_ratio": {k: list(v) for k, v in self.station_ratio.items()},
            "other": [{"element": e, "variable": v, "bounds": list(b)}
                      for (e, v), b in self.other.items()],
        }

    @classmethod
    def from_json(cls, d: dict) -> "ConstraintSet":
        return cls(
            default_pressure=tuple(d.get("default_pressure", (1.0e5, DEFAULT_P_MAX))),
            node_pressure={k: tuple(v) for k, v in d.get("node_pressure", {}).items()},
            station_ratio={k: tuple(v) for k, v in d.get("station_ratio", {}).items()},
            other={(r["element"], r["variable"]): tuple(r["bounds"])
                   for r in d.get("other", [])},
        )


@dataclass
class NetworkModel:
    nodes: list
    elements: list
    gas: GasSpec
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    anchor_priority: list = field(default_factory=list)
    artificial_pressure: float = 2.2e6  # Pa, repair anchor for cut-off branches

    def node_ids(self):
        return [n.id for n in self.nodes]

    def element(self, element_id: str):
        for e in self.elements:
            if e.id == element_id:
                return e
        raise KeyError(element_id)

    def stations(self):
        return [e for e in self.elements if e.kind == "station"]

    def outlets(self):
        return [e for e in self.elements if e.kind == "outlet"]

    def intakes(self):
        return [e for e in self.elements if e.kind == "intake"]

    def edges(self):
        return [e for e in self.elements if e.kind in EDGE_KINDS]

    # ---- JSON I/O -------------------------------------------------------

    def to_json(self) -> dict:
        elems = []
        for e in self.elements:
            d = {"id": e.id, "kind": e.kind}
            if e.kind == "pipe":
                d.update(from_node=e.from_node, to_node=e.to_node,
                         diameter=e.diameter, length=e.length,
                         roughness=e.roughness, segments=e.segments,
                         unit={"diameter": "m", "length": "m", "roughness": "m"})
            elif e.kind == "station":
                d.update(from_node=e.from_node, to_node=e.to_node,
                         bypass_allowed=e.bypass_allowed, min_dp=e.min_dp,
                         cooler_temp=e.cooler_temp,
                         bypass_coefficient=e.bypass_coefficient,
                         unit={"min_dp": "Pa", "cooler_temp": "K"},
                         machines=[{
                             "id": m.id, "f_min": m.f_min, "f_max": m.f_max,
                             "h_max": m.h_max, "eta_ad": m.eta_ad,
                             "eta_dr": m.eta_dr, "odometer": m.odometer,
                             "unit": {"f_min": "Nm3/h", "f_max": "Nm3/h",
                                      "odometer": "h"},
                         } for m in e.machines])
            elif e.kind == "controlled_valve":
                d.update(from_node=e.from_node, to_node=e.to_node, mode=e.mode,
                         flow_coefficient=e.flow_coefficient)
            elif e.kind == "simple_valve":
                d.update(from_node=e.from_node, to_node=e.to_node, open=e.open,
                         flow_coefficient=e.flow_coefficient)
            else:  # intake / outlet
                d.update(node=e.node)
            elems.append(d)
        return {
            "nodes": [{"id": n.id, "elevation": n.elevation, "unit": {"elevation": "m"}}
                      for n in self.nodes],
            "elements": elems,
            "gas": {
                "p_crit": self.gas.p_crit, "t_crit": self.gas.t_crit,
                "r_specific": self.gas.r_specific, "kappa": self.gas.kappa,
                "lhv": self.gas.lhv, "normal_density": self.gas.normal_density,
                "viscosity": self.gas.viscosity,
                "unit": {"p_crit": "Pa", "t_crit": "K", "r_specific": "J/(kg K)",
                         "lhv": "J/Nm3", "normal_density": "kg/Nm3",
                         "viscosity": "Pa s"},
            },
            "constraints": self.constraints.to_json(),
            "anchor_priority": list(self.anchor_priority),
            "artificial_pressure": self.artificial_pressure,
        }

    @classmethod
    def from_json(cls, d: dict) -> "NetworkModel":
        nodes = [Node(n["id"], n.get("elevation", 0.0)) for n in d["nodes"]]
        elements = []
        for e in d["elements"]:
            kind = e["kind"]
            if kind == "pipe":
                elements.append(Pipe(e["id"], e["from_node"], e["to_node"],
                                     e["diameter"], e["length"], e["roughness"],
                                     e.get("segments", 0)))
            elif kind == "station":
                machines = tuple(Machine(m["id"], m["f_min"], m["f_max"],
                                         m["h_max"], m["eta_ad"], m["eta_dr"],
                                         m.get("odometer", 0.0))
                                 for m in e["machines"])
                elements.append(CompressorStation(
                    e["id"], e["from_node"], e["to_node"], machines,
                    e.get("bypass_allowed", True), e.get("min_dp", 0.0),
                    e.get("cooler_temp", 288.15),
                    e.get("bypass_coefficient", 2e-6)))
            elif kind == "controlled_valve":
                elements.append(ControlledValve(e["id"], e["from_node"],
                                                e["to_node"], e.get("mode", "open"),
                                                e.get("flow_coefficient", 2e-6)))
            elif kind == "simple_valve":
                elements.append(SimpleValve(e["id"], e["from_node"], e["to_node"],
                                            e.get("open", True),
                                            e.get("flow_coefficient", 2e-6)))
            elif kind == "intake":
                elements.append(Intake(e["id"], e["node"]))
            elif kind == "outlet":
                elements.append(Outlet(e["id"], e["node"]))
            else:
                raise ValueError(f"unknown element kind {kind!r}")
        g = d["gas"]
        gas = GasSpec(g["p_crit"], g["t_crit"], g["r_specific"], g["kappa"],
                      g["lhv"], g["normal_density"], g.get("viscosity", 1.1e-5))
        constraints = ConstraintSet.from_json(d.get("constraints", {}))
        return cls(nodes, elements, gas, constraints,
                   list(d.get("anchor_priority", [])),
                   d.get("artificial_pressure", 2.2e6))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "NetworkModel":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    def add(self, element_id: str, message: str):
        self.violations.append((element_id, message))

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_network(model: NetworkModel) -> ValidationReport:
    """Check all structural invariants; returns an empty report iff they hold."""
    report = ValidationReport()
    node_ids = set()
    for n in model.nodes:
        if n.id in node_ids:
            report.add(n.id, "duplicate node id")
        node_ids.add(n.id)

    seen_elements = set()
    for e in model.elements:
        if e.id in seen_elements:
            report.add(e.id, "duplicate element id")
        seen_elements.add(e.id)

        endpoints = ((e.from_node, e.to_node) if e.kind in EDGE_KINDS
                     else (e.node,))
        for ep in endpoints:
            if ep not in node_ids:
                report.add(e.id, f"dangling reference to node {ep!r}")

        if e.kind == "pipe":
            if e.diameter <= 0:
                report.add(e.id, "pipe diameter must be > 0")
            if e.length <= 0:
                report.add(e.id, "pipe length must be > 0")
            if e.roughness < 0:
                report.add(e.id, "pipe roughness must be >= 0")
            if e.segments < 0:
                report.add(e.id, "segment count must be >= 0")
        elif e.kind == "station":
            if not e.machines:
                report.add(e.id, "station must have at least one machine")
            if e.min_dp < 0:
                report.add(e.id, "min_dp must be >= 0")
            for m in e.machines:
                if not (0 <= m.f_min <= m.f_max):
                    report.add(e.id, f"machine {m.id}: need 0 <= f_min <= f_max")
                if m.h_max <= 1:
                    report.add(e.id, f"machine {m.id}: h_max must be > 1")
                if not (0 < m.eta_ad <= 1) or not (0 < m.eta_dr <= 1):
                    report.add(e.id, f"machine {m.id}: efficiencies must be in (0, 1]")
                if m.odometer < 0:
                    report.add(e.id, f"machine {m.id}: odometer must be >= 0")

    for target, var, (lo, hi) in model.constraints.all_pairs():
        if lo > hi:
            report.add(target, f"{var} bounds reversed ({lo} > {hi})")
    return report
