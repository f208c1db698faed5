"""Initial network state from measurements via per-component static solve.

Active elements (compressor stations, controlled valves with measured flow)
are cut and replaced by intake/outlet pairs; each component of the resulting
graph is solved from one pressure anchor plus its boundary flows.  Repairs
(artificial anchors for cut-off branches, flow-balance absorption) are always
recorded in the report, never applied silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core.network import NetworkModel
from ..sim.solver import BoundarySpec, CompiledNetwork, steady_state
from ..sim.state import SystemState, Trajectory
from .ingest import MeasurementSet


class EstimationError(RuntimeError):
    pass


@dataclass
class EstimationReport:
    anchors: dict = field(default_factory=dict)       # component key -> node id
    repairs: list = field(default_factory=list)       # human-readable records
    discarded_pressures: list = field(default_factory=list)  # node ids unused
    balance_adjustments: list = field(default_factory=list)  # (point, delta kg/s)

    def to_json(self) -> dict:
        return {"anchors": dict(self.anchors), "repairs": list(self.repairs),
                "discarded_pressures": list(self.discarded_pressures),
                "balance_adjustments": [[p, d] for p, d in self.balance_adjustments]}


def _component_key(comp) -> str:
    model_nodes = sorted(n for n in comp if "#" not in n)
    return model_nodes[0] if model_nodes else sorted(comp)[0]


def estimate_initial_state(model: NetworkModel, measurements: MeasurementSet,
                           temp: float = 283.15,
                           allow_artificial: bool = True,
                           max_segment_len: float = 5000.0):
    """Build a full SystemState from a validated measurement set.

    Returns (SystemState, EstimationReport).
    """
    gas = model.gas
    report = EstimationReport()

    # elements to cut: stations always (their flow is commanded/measured),
    # controlled valves when their flow is measured
    element_flows = {}
    for e in model.elements:
        if e.kind == "station":
            flow = measurements.get(e.id, "flow")
            if flow is None:
                raise EstimationError(f"no flow measurement for station {e.id!r}")
            element_flows[e.id] = gas.mass_flow(flow)
        elif e.kind == "controlled_valve":
            flow = measurements.get(e.id, "flow")
            if flow is not None:
                element_flows[e.id] = gas.mass_flow(flow)

    net = CompiledNetwork(model, max_segment_len)
    comps = net.components(element_flows)

    # node injections from intake/outlet measurements
    node_flows = {}
    point_node = {}
    for e in model.elements:
        if e.kind not in ("intake", "outlet"):
            continue
        flow = measurements.get(e.id, "flow")
        if flow is None:
            continue
        sign = 1.0 if e.kind == "intake" else -1.0
        node_flows[e.node] = node_flows.get(e.node, 0.0) + sign * gas.mass_flow(flow)
        point_node[e.id] = e.node

    measured_p = measurements.pressures()
    pressures = {}
    used_anchor_nodes = set()

    for comp in comps:
        key = _component_key(comp)
        anchor = None
        for nid in model.anchor_priority:
            if nid in comp and nid in measured_p:
                anchor = nid
                break
        if anchor is None:
            candidates = sorted(n for n in comp if n in measured_p)
            if candidates:
                anchor = candidates[0]
        if anchor is None:
            if not allow_artificial:
                raise EstimationError(
                    f"component containing {key!r} has no pressure measurement")
            anchor = next((n for n in model.anchor_priority if n in comp), key)
            pressures[anchor] = model.artificial_pressure
            report.repairs.append(
                f"artificial pressure {model.artificial_pressure / 1e6:.1f} MPa "
                f"injected at {anchor} (component had no measurement)")
        else:
            pressures[anchor] = measured_p[anchor]
        report.anchors[key] = anchor
        used_anchor_nodes.add(anchor)

        # balance this component's boundary flows on its largest contributor
        contributions = []
        for nid, q in node_flows.items():
            if nid in comp:
                contributions.append((f"node:{nid}", nid, q))
        for eid, q in element_flows.items():
            e = model.element(eid)
            if e.from_node in comp:
                contributions.append((f"{eid}:out", e.from_node, -q))
            if e.to_node in comp:
                contributions.append((f"{eid}:in", e.to_node, q))
        imbalance = sum(q for _, _, q in contributions)
        if contributions and abs(imbalance) > 1e-12:
            # prefer absorbing on an intake/outlet flow: a cut-element flow is
            # shared with the neighbouring component and would unbalance it
            node_contribs = [c for c in contributions if c[0].startswith("node:")]
            pool = node_contribs or contributions
            tag, nid, q = max(pool, key=lambda c: abs(c[2]))
            report.balance_adjustments.append((tag, -imbalance))
            report.repairs.append(
                f"absorbed flow imbalance of {imbalance:.6g} kg/s on {tag}")
            if tag.startswith("node:"):
                node_flows[nid] = node_flows[nid] - imbalance
            else:
                eid, side = tag.rsplit(":", 1)
                element_flows[eid] += imbalance if side == "out" else -imbalance

    report.discarded_pressures = sorted(set(measured_p) - used_anchor_nodes)

    boundary = BoundarySpec(pressures=pressures, node_flows=node_flows,
                            element_flows=element_flows)
    state = steady_state(model, boundary, temp=temp,
                         max_segment_len=max_segment_len)
    state.time = measurements.timestamp
    return state, report


def discard_first_step(traj: Trajectory) -> Trajectory:
    """Drop the first computed step; downstream evaluation uses the result."""
    return traj.without_first_step()
