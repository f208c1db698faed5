"""Steady-state and transient nodal solver for the pipe network.

Pipes are semi-discretized into segments of bounded length; segment flow
follows the isothermal quasi-steady friction balance

    p_a^2 - p_b^2 = lambda * Z * R * T * L / (D * A^2) * m |m|

with Hofer friction and Papay compressibility.  Cell pressures are the state
variables; transient steps use backward Euler on the cell mass balances and a
damped Newton iteration.  Valves (and station bypasses) are square-law
resistance elements.  Active compressor stations impose their commanded flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core.gas import (PAPAY_A, PAPAY_B, PAPAY_C, PAPAY_D, GasSpec)
from ..core.network import NetworkModel
from .fuel import station_fuel_rate
from .state import (ControlVector, ExogenousInputs, StationOps, SystemState,
                    Trajectory, Violation, ViolationReport)

DEFAULT_DT_SIM = 300.0          # s
DEFAULT_MAX_SEGMENT = 5000.0    # m
DP_REG = 50.0                   # Pa, square-law regularization scale
NEWTON_MAX_ITER = 50
NEWTON_TOL_REL = 1e-8


class InfeasibleBoundaryError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class SimulationError(RuntimeError):
    """Transient solve diverged; carries the last valid trajectory prefix."""

    def __init__(self, msg, prefix: Trajectory | None = None):
        super().__init__(msg)
        self.prefix = prefix


@dataclass
class BoundarySpec:
    """Boundary data for a steady solve on the modified (cut) graph.

    ``pressures``: node id -> Pa, exactly one anchor per connected component.
    ``node_flows``: node id -> kg/s net injection (positive into the network).
    ``element_flows``: element id -> kg/s for active elements that are cut and
    replaced by an intake/outlet pair (flow in the element's a->b direction).
    """

    pressures: dict = field(default_factory=dict)
    node_flows: dict = field(default_factory=dict)
    element_flows: dict = field(default_factory=dict)


def _z_arr(p, t, gas):
    pr = p / gas.p_crit
    tr = t / gas.t_crit
    return (1.0 - PAPAY_A * pr * np.exp(-PAPAY_B * tr)
            + PAPAY_C * pr * pr * np.exp(-PAPAY_D * tr))


def _dz_dp_arr(p, t, gas):
    pr = p / gas.p_crit
    tr = t / gas.t_crit
    return (-PAPAY_A * np.exp(-PAPAY_B * tr)
            + 2.0 * PAPAY_C * pr * np.exp(-PAPAY_D * tr)) / gas.p_crit


def _hofer_arr(re, k, d):
    re = np.maximum(re, 2320.0)  # solver works in the turbulent branch
    arg = (4.518 / re) * np.log10(re / 7.0) + k / (3.71 * d)
    return (-2.0 * np.log10(arg)) ** -2


def _smooth_sqrt(delta, reg):
    """Signed square root of delta with slope-limited behavior near zero."""
    mag = (delta * delta + reg * reg) ** 0.25
    s = delta / mag
    ds = (delta * delta + reg * reg) ** -1.25 * (0.5 * delta * delta + reg * reg)
    return s, ds


class CompiledNetwork:
    """Model compiled into index arrays for vectorized residual assembly."""

    def __init__(self, model: NetworkModel, max_segment_len: float = DEFAULT_MAX_SEGMENT):
        self.model = model
        self.gas = model.gas
        self.max_segment_len = max_segment_len

        node_ids = [n.id for n in model.nodes]
        self.node_index = {nid: i for i, nid in enumerate(node_ids)}

        pf_a, pf_b, pf_len, pf_d, pf_area, pf_rough = [], [], [], [], [], []
        self.pipe_faces = {}      # pipe id -> (first face index, count)
        volumes = {}

        for e in model.elements:
            if e.kind != "pipe":
                continue
            nseg = e.segments or max(1, math.ceil(e.length / max_segment_len))
            seg_len = e.length / nseg
            area = math.pi * e.diameter ** 2 / 4.0
            chain = [self.node_index[e.from_node]]
            for k in range(1, nseg):
                cid = f"{e.id}#{k}"
                self.node_index[cid] = len(self.node_index)
                chain.append(self.node_index[cid])
            chain.append(self.node_index[e.to_node])
            first = len(pf_a)
            for a, b in zip(chain, chain[1:]):
                pf_a.append(a)
                pf_b.append(b)
                pf_len.append(seg_len)
                pf_d.append(e.diameter)
                pf_area.append(area)
                pf_rough.append(e.roughness)
                half = 0.5 * area * seg_len
                volumes[a] = volumes.get(a, 0.0) + half
                volumes[b] = volumes.get(b, 0.0) + half
            self.pipe_faces[e.id] = (first, nseg)

        self.n = len(self.node_index)
        self.pf_a = np.array(pf_a, dtype=int)
        self.pf_b = np.array(pf_b, dtype=int)
        self.pf_len = np.array(pf_len)
        self.pf_d = np.array(pf_d)
        self.pf_area = np.array(pf_area)
        self.pf_rough = np.array(pf_rough)
        self.volume = np.zeros(self.n)
        for i, v in volumes.items():
            self.volume[i] = v

        self.stations = [e for e in model.elements if e.kind == "station"]
        self.valves = [e for e in model.elements
                       if e.kind in ("controlled_valve", "simple_valve")]
        self.names = {i: nid for nid, i in self.node_index.items()}

    # -- state vector <-> SystemState ------------------------------------

    def pressures_from_state(self, state: SystemState) -> np.ndarray:
        """Vectorize a state, interpolating internal cells that are missing
        (e.g. when the segmentation differs from the state's origin)."""
        p = np.zeros(self.n)
        missing = []
        for nid, i in self.node_index.items():
            if nid in state.node_pressure:
                p[i] = state.node_pressure[nid]
            else:
                missing.append(nid)
        for nid in missing:
            pipe_id, k = nid.rsplit("#", 1)
            e = self.model.element(pipe_id)
            nseg = self.pipe_faces[pipe_id][1]
            frac = int(k) / nseg
            pa = state.node_pressure[e.from_node]
            pb = state.node_pressure[e.to_node]
            p[self.node_index[nid]] = pa + (pb - pa) * frac
        return p

    def face_guess_from_state(self, state: SystemState) -> np.ndarray:
        m = np.zeros(len(self.pf_a))
        for pid, (first, count) in self.pipe_faces.items():
            m[first:first + count] = state.element_flow.get(pid, 0.0)
        return m

    def stored_mass(self, p: np.ndarray, temp: float) -> float:
        rho = p / (_z_arr(p, temp, self.gas) * self.gas.r_specific * temp)
        return float(np.dot(self.volume, rho))

    # -- Newton core ------------------------------------------------------

    def solve(self, p0, fixed_idx, fixed_val, inj, valve_faces, temp,
              m_guess=None, storage=None):
        """Damped Newton on the nodal balances.

        ``valve_faces`` is (a_idx, b_idx, coeff, ids) for the square-law
        elements present in this solve.  ``storage`` is None for steady or
        (p_old, dt) for one backward-Euler step.  Returns (p, pipe_flows,
        valve_flows, iterations).
        """
        gas = self.gas
        n = self.n
        p = p0.copy()
        p[fixed_idx] = fixed_val
        unknown = np.ones(n, dtype=bool)
        unknown[fixed_idx] = False
        uidx = np.where(unknown)[0]
        if m_guess is None:
            m_guess = np.zeros(len(self.pf_a))
        va, vb, vc, _ = valve_faces

        m_ref = max(1.0, float(np.sum(np.abs(inj))) or 1.0)
        tol = NEWTON_TOL_REL * m_ref

        def assemble(p, m_lag):
            pa, pb = p[self.pf_a], p[self.pf_b]
            pm = 0.5 * (pa + pb)
            z = _z_arr(pm, temp, gas)
            re = np.abs(m_lag) * self.pf_d / (self.pf_area * gas.viscosity)
            lam = _hofer_arr(re, self.pf_rough, self.pf_d)
            K = np.sqrt(self.pf_d * self.pf_area ** 2
                        / (lam * z * gas.r_specific * temp * self.pf_len))
            delta = pa * pa - pb * pb
            reg = 2.0 * np.maximum(pm, 1e4) * DP_REG
            s, ds = _smooth_sqrt(delta, reg)
            m = K * s
            ga = K * ds * 2.0 * pa
            gb = -K * ds * 2.0 * pb

            mv = np.zeros(0)
            if len(va):
                qa, qb = p[va], p[vb]
                dv = qa * qa - qb * qb
                regv = 2.0 * np.maximum(0.5 * (qa + qb), 1e4) * DP_REG
                sv, dsv = _smooth_sqrt(dv, regv)
                mv = vc * sv
                gva = vc * dsv * 2.0 * qa
                gvb = -vc * dsv * 2.0 * qb
            else:
                gva = gvb = np.zeros(0)

            r = inj.copy()
            np.subtract.at(r, self.pf_a, m)
            np.add.at(r, self.pf_b, m)
            if len(va):
                np.subtract.at(r, va, mv)
                np.add.at(r, vb, mv)

            jac = np.zeros((n, n))
            np.add.at(jac, (self.pf_a, self.pf_a), -ga)
            np.add.at(jac, (self.pf_a, self.pf_b), -gb)
            np.add.at(jac, (self.pf_b, self.pf_a), ga)
            np.add.at(jac, (self.pf_b, self.pf_b), gb)
            if len(va):
                np.add.at(jac, (va, va), -gva)
                np.add.at(jac, (va, vb), -gvb)
                np.add.at(jac, (vb, va), gva)
                np.add.at(jac, (vb, vb), gvb)

            if storage is not None:
                p_old, dt = storage
                z_n = _z_arr(p, temp, gas)
                rho = p / (z_n * gas.r_specific * temp)
                z_o = _z_arr(p_old, temp, gas)
                rho_old = p_old / (z_o * gas.r_specific * temp)
                r -= self.volume * (rho - rho_old) / dt
                drho = ((z_n - p * _dz_dp_arr(p, temp, gas))
                        / (z_n * z_n * gas.r_specific * temp))
                jac[np.arange(n), np.arange(n)] -= self.volume * drho / dt
            return r, jac, m, mv

        r, jac, m, mv = assemble(p, m_guess)
        res = float(np.max(np.abs(r[uidx]))) if len(uidx) else 0.0
        for it in range(NEWTON_MAX_ITER):
            if res <= tol:
                return p, m, mv, it
            ju = jac[np.ix_(uidx, uidx)]
            try:
                dp = np.linalg.solve(ju, -r[uidx])
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError(f"singular Jacobian: {exc}", res) from exc
            # keep pressures positive and steps bounded
            scale = 1.0
            pu = p[uidx]
            bad = dp < -0.9 * pu
            if np.any(bad):
                scale = min(scale, float(np.min(0.9 * pu[bad] / -dp[bad])))
            for _ in range(8):
                p_try = p.copy()
                p_try[uidx] = pu + scale * dp
                r2, jac2, m2, mv2 = assemble(p_try, m)
                res2 = float(np.max(np.abs(r2[uidx])))
                if res2 < res or res2 <= tol:
                    break
                scale *= 0.5
            p, r, jac, m, mv, res = p_try, r2, jac2, m2, mv2, res2
        if res > tol:
            raise ConvergenceError(
                f"Newton did not converge in {NEWTON_MAX_ITER} iterations "
                f"(residual {res:.3e}, tol {tol:.3e})", res)
        return p, m, mv, NEWTON_MAX_ITER

    # -- connected components on the cut graph ----------------------------

    def components(self, cut_elements=()):
        """Connected components over pipe and open valve edges, with the
        given element ids removed.  Returns a list of sets of node ids
        (model nodes and cells)."""
        cut = set(cut_elements)
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry

        for pid, (first, count) in self.pipe_faces.items():
            if pid in cut:
                continue
            for f in range(first, first + count):
                union(self.pf_a[f], self.pf_b[f])
        for v in self.valves:
            if v.id in cut:
                continue
            if v.kind == "simple_valve" and not v.open:
                continue
            if v.kind == "controlled_valve" and v.mode == "closed":
                continue
            union(self.node_index[v.from_node], self.node_index[v.to_node])
        groups: dict = {}
        for i in range(self.n):
            groups.setdefault(find(i), set()).add(self.names[i])
        return list(groups.values())


def _open_valve_faces(net: CompiledNetwork, cut=(), bypass_stations=()):
    va, vb, vc, ids = [], [], [], []
    for v in net.valves:
        if v.id in cut:
            continue
        if v.kind == "simple_valve" and not v.open:
            continue
        if v.kind == "controlled_valve" and v.mode == "closed":
            continue
        va.append(net.node_index[v.from_node])
        vb.append(net.node_index[v.to_node])
        vc.append(v.flow_coefficient)
        ids.append(v.id)
    for st in bypass_stations:
        va.append(net.node_index[st.from_node])
        vb.append(net.node_index[st.to_node])
        vc.append(st.bypass_coefficient)
        ids.append(st.id)
    return (np.array(va, dtype=int), np.array(vb, dtype=int),
            np.array(vc), ids)


def _build_state(net: CompiledNetwork, p, m_pipe, mv, valve_ids, time, temp,
                 station_modes, station_flows):
    """Assemble a SystemState from solver arrays."""
    gas = net.gas
    node_pressure = {nid: float(p[i]) for nid, i in net.node_index.items()}
    element_flow = {}
    for pid, (first, count) in net.pipe_faces.items():
        element_flow[pid] = float(m_pipe[first])
    valve_dp = {}
    vmap = dict(zip(valve_ids, mv)) if len(valve_ids) else {}
    for v in net.valves:
        a = p[net.node_index[v.from_node]]
        b = p[net.node_index[v.to_node]]
        if v.id in vmap:
            element_flow[v.id] = float(vmap[v.id])
        else:
            element_flow[v.id] = 0.0
        valve_dp[v.id] = float(a - b)
    stations = {}
    for st in net.stations:
        pa = float(p[net.node_index[st.from_node]])
        pb = float(p[net.node_index[st.to_node]])
        mode = station_modes.get(st.id, "bypass")
        if mode == "bypass":
            flow_kgps = float(vmap.get(st.id, 0.0))
            flow = gas.volumetric_flow(flow_kgps)
            ops = StationOps("bypass", flow, 1.0, pa, pb, 0.0)
        elif mode == "off":
            ops = StationOps("off", 0.0, 1.0, pa, pb, 0.0)
            flow_kgps = 0.0
        else:
            flow = station_flows[st.id]
            flow_kgps = gas.mass_flow(flow)
            ratio = pb / pa if pa > 0 else 1.0
            fuel = station_fuel_rate(st, flow, max(ratio, 1.0), pa, temp, gas) \
                if ratio > 1.0 else 0.0
            ops = StationOps("active", flow, ratio, pa, pb, fuel)
        element_flow[st.id] = flow_kgps
        stations[st.id] = ops
    return SystemState(time, node_pressure, element_flow, stations, valve_dp, temp)


def steady_state(model: NetworkModel, boundary: BoundarySpec,
                 temp: float = 283.15,
                 max_segment_len: float = DEFAULT_MAX_SEGMENT,
                 eps_bal: float = 1e-6) -> SystemState:
    """Steady solve of the modified graph (active elements cut per boundary).

    Each connected component needs exactly one pressure anchor and balanced
    boundary flows.
    """
    net = CompiledNetwork(model, max_segment_len)
    cut = set(boundary.element_flows)
    comps = net.components(cut)

    inj = np.zeros(net.n)
    for nid, q in boundary.node_flows.items():
        inj[net.node_index[nid]] += q
    for eid, q in boundary.element_flows.items():
        e = model.element(eid)
        inj[net.node_index[e.from_node]] -= q
        inj[net.node_index[e.to_node]] += q

    total = float(np.sum(np.abs(inj)))
    for comp in comps:
        anchors = [nid for nid in boundary.pressures if nid in comp]
        if len(anchors) != 1:
            raise InfeasibleBoundaryError(
                f"component {sorted(comp)[:4]}... needs exactly one pressure "
                f"anchor, got {len(anchors)}")
        bal = float(sum(inj[net.node_index[nid]] for nid in comp))
        if abs(bal) > eps_bal * max(1.0, total):
            raise InfeasibleBoundaryError(
                f"boundary flows unbalanced by {bal:.6g} kg/s in component "
                f"containing {anchors[0]!r}")

    fixed_idx = np.array([net.node_index[nid] for nid in boundary.pressures],
                         dtype=int)
    fixed_val = np.array([boundary.pressures[nid] for nid in boundary.pressures])

    p0 = np.zeros(net.n)
    for comp in comps:
        anchor = next(nid for nid in boundary.pressures if nid in comp)
        for nid in comp:
            p0[net.node_index[nid]] = boundary.pressures[anchor]

    valve_faces = _open_valve_faces(net, cut)
    p, m, mv, _ = net.solve(p0, fixed_idx, fixed_val, inj, valve_faces, temp)

    station_modes, station_flows = {}, {}
    for st in net.stations:
        if st.id in boundary.element_flows:
            q = boundary.element_flows[st.id]
            flow = model.gas.volumetric_flow(q)
            pa = p[net.node_index[st.from_node]]
            pb = p[net.node_index[st.to_node]]
            if flow >= st.f_min and pb > pa:
                station_modes[st.id] = "active"
                station_flows[st.id] = flow
            else:
                station_modes[st.id] = "bypass"
    state = _build_state(net, p, m, mv, valve_faces[3], 0.0, temp,
                         station_modes, station_flows)
    # cut elements carry their boundary flow, not a face flow
    for eid, q in boundary.element_flows.items():
        state.element_flow[eid] = q
        if station_modes.get(eid) == "bypass":
            st = state.stations.get(eid)
            if st is not None:
                st.flow_nm3h = model.gas.volumetric_flow(q)
    return state


def simulate(model: NetworkModel, initial: SystemState, control: ControlVector,
             w: ExogenousInputs, dt_sim: float = DEFAULT_DT_SIM,
             max_segment_len: float = DEFAULT_MAX_SEGMENT):
    """Transient simulation over the horizon of ``w``.

    Returns (Trajectory, ViolationReport).  Constraint violations never abort
    the run; solver divergence raises SimulationError with the valid prefix.
    """
    net = CompiledNetwork(model, max_segment_len)
    gas = model.gas
    p = net.pressures_from_state(initial)
    m_guess = net.face_guess_from_state(initial)

    n_steps = int(round(w.horizon / dt_sim))
    if n_steps < 1:
        raise ValueError("horizon shorter than one simulation step")

    pressure_nodes = {}
    flow_points = {}
    for e in model.elements:
        if e.kind in ("intake", "outlet"):
            if e.id in w.pressure:
                pressure_nodes[e.id] = e.node
            elif e.id in w.demand:
                flow_points[e.id] = (e.node, -1.0 if e.kind == "outlet" else 1.0)
            else:
                raise ValueError(f"boundary point {e.id!r} has no exogenous series")

    fixed_idx = np.array([net.node_index[n] for n in pressure_nodes.values()],
                         dtype=int)

    states = []
    try:
        for k in range(1, n_steps + 1):
            t = w.t0 + k * dt_sim
            temp = w.temperature.at(t)
            fixed_val = np.array([w.pressure[pid].at(t)
                                  for pid in pressure_nodes])

            inj = np.zeros(net.n)
            for pid, (nid, sign) in flow_points.items():
                inj[net.node_index[nid]] += sign * gas.mass_flow(w.demand[pid].at(t))

            # station mode decision: commanded flow below f_min -> bypass/off
            modes = {}
            flows = {}
            for st in net.stations:
                f_cmd = min(max(control.flow_at(st.id, t - dt_sim), 0.0), st.f_max)
                if f_cmd >= st.f_min:
                    modes[st.id] = "active"
                    flows[st.id] = f_cmd
                else:
                    modes[st.id] = "bypass" if st.bypass_allowed else "off"

            for _attempt in range(len(net.stations) + 1):
                bypass = [st for st in net.stations if modes[st.id] == "bypass"]
                inj_k = inj.copy()
                for st in net.stations:
                    if modes[st.id] == "active":
                        q = gas.mass_flow(flows[st.id])
                        inj_k[net.node_index[st.from_node]] -= q
                        inj_k[net.node_index[st.to_node]] += q
                valve_faces = _open_valve_faces(net, bypass_stations=bypass)
                p_new, m, mv, _ = net.solve(
                    p, fixed_idx, fixed_val, inj_k, valve_faces, temp,
                    m_guess=m_guess, storage=(p, dt_sim))
                # delta-p precondition: a station that cannot raise pressure
                # falls back to bypass for this step
                demoted = False
                for st in net.stations:
                    if modes[st.id] != "active" or not st.bypass_allowed:
                        continue
                    pa = p_new[net.node_index[st.from_node]]
                    pb = p_new[net.node_index[st.to_node]]
                    if pb - pa < st.min_dp or pb <= pa:
                        modes[st.id] = "bypass"
                        demoted = True
                if not demoted:
                    break

            state = _build_state(net, p_new, m, mv, valve_faces[3], t, temp,
                                 modes, flows)
            state.stored_mass = net.stored_mass(p_new, temp)
            # net boundary inflow this step (kg/s): injections at free nodes
            # plus whatever the pressure-anchored nodes supplied
            gas_r = gas.r_specific
            supply = float(np.sum(inj_k)) - float(np.sum(inj_k[fixed_idx]))
            for i in fixed_idx:
                faceout = float(np.sum(m[net.pf_a == i]) - np.sum(m[net.pf_b == i]))
                if len(valve_faces[0]):
                    faceout += float(np.sum(mv[valve_faces[0] == i])
                                     - np.sum(mv[valve_faces[1] == i]))
                rho_new = p_new[i] / (_z_arr(p_new[i:i + 1], temp, gas)[0]
                                      * gas_r * temp)
                rho_old = p[i] / (_z_arr(p[i:i + 1], temp, gas)[0] * gas_r * temp)
                storage_rate = net.volume[i] * (rho_new - rho_old) / dt_sim
                supply += faceout + storage_rate
            state.boundary_inflow = supply
            states.append(state)
            p, m_guess = p_new, m
    except ConvergenceError as exc:
        prefix = Trajectory(states, dt_sim) if states else None
        raise SimulationError(f"transient solve diverged at step {len(states) + 1}: "
                              f"{exc}", prefix) from exc

    traj = Trajectory(states, dt_sim)
    report = check_constraints(traj, model.constraints, skip_first=True)
    return traj, report


def check_constraints(traj: Trajectory, cs, skip_first: bool = True) -> ViolationReport:
    """One violation record per (variable, time step) outside its bounds.

    The first simulation step is exempt by default (initial-estimate flow
    peaks are an artifact of static state estimation).
    """
    report = ViolationReport()
    states = traj.states[1:] if skip_first and len(traj.states) > 1 else traj.states
    if skip_first and len(traj.states) <= 1:
        states = []
    for s in states:
        for nid, p in s.node_pressure.items():
            if "#" in nid:
                continue
            lo, hi = cs.pressure_bounds(nid)
            if p < lo:
                report.add(Violation(nid, "pressure", s.time, "min", lo, p))
            elif p > hi:
                report.add(Violation(nid, "pressure", s.time, "max", hi, p))
        for sid, ops in s.stations.items():
            bounds = cs.ratio_bounds(sid)
            if bounds and ops.mode == "active":
                lo, hi = bounds
                if ops.ratio < lo:
                    report.add(Violation(sid, "ratio", s.time, "min", lo, ops.ratio))
                elif ops.ratio > hi:
                    report.add(Violation(sid, "ratio", s.time, "max", hi, ops.ratio))
            dp_bounds = cs.other.get((sid, "dp"))
            if dp_bounds and ops.mode == "active":
                lo, hi = dp_bounds
                if ops.dp < lo:
                    report.add(Violation(sid, "dp", s.time, "min", lo, ops.dp))
                elif ops.dp > hi:
                    report.add(Violation(sid, "dp", s.time, "max", hi, ops.dp))
        for (eid, var), (lo, hi) in cs.other.items():
            if var == "dp" and eid in s.valve_dp:
                v = s.valve_dp[eid]
            elif var == "flow" and eid in s.element_flow:
                v = s.element_flow[eid]
            elif var == "temperature":
                v = s.temperature
            else:
                continue
            if v < lo:
                report.add(Violation(eid, var, s.time, "min", lo, v))
            elif v > hi:
                report.add(Violation(eid, var, s.time, "max", hi, v))
    return report
