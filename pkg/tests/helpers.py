"""Independent numerical oracles shared by unit and acceptance tests.

Everything here deliberately avoids the solver's own code paths: friction by
fixed-point Colebrook iteration, compressibility and fuel by mpmath at high
precision, pipe profiles by adaptive ODE integration.
"""

import math

import mpmath
import numpy as np
from scipy.integrate import solve_ivp

from gridpress.core.gas import METHANE_LIKE, hofer_friction, papay_z
from gridpress.core.network import Intake, NetworkModel, Node, Outlet, Pipe
from gridpress.sim.solver import BoundarySpec, steady_state

mpmath.mp.dps = 50


def papay_z_mp(p, t, gas):
    """Arbitrary-precision evaluation of the compressibility correlation."""
    pr = mpmath.mpf(p) / mpmath.mpf(gas.p_crit)
    tr = mpmath.mpf(t) / mpmath.mpf(gas.t_crit)
    return (1 - mpmath.mpf("3.52") * pr * mpmath.exp(-mpmath.mpf("2.26") * tr)
            + mpmath.mpf("0.274") * pr ** 2
            * mpmath.exp(-mpmath.mpf("1.878") * tr))


def colebrook_friction(re, rel_roughness, tol=1e-12):
    """Colebrook-White friction factor by fixed-point iteration on
    1/sqrt(lam)."""
    x = 1.0 / math.sqrt(0.02)
    for _ in range(200):
        nxt = -2.0 * math.log10(2.51 * x / re + rel_roughness / 3.71)
        if abs(nxt - x) < tol:
            x = nxt
            break
        x = nxt
    return 1.0 / (x * x)


def fuel_rate_mp(flow_nm3h, ratio, suction_p, temp, eta_ad, eta_dr, gas):
    """High-precision evaluation of the adiabatic fuel model."""
    m = mpmath.mpf(flow_nm3h) * mpmath.mpf(gas.normal_density) / 3600
    kappa = mpmath.mpf(gas.kappa)
    z = papay_z_mp(suction_p, temp, gas)
    power = (m * kappa / (kappa - 1) * z * mpmath.mpf(gas.r_specific)
             * mpmath.mpf(temp)
             * (mpmath.mpf(ratio) ** ((kappa - 1) / kappa) - 1)
             / mpmath.mpf(eta_ad))
    return power / (mpmath.mpf(eta_dr) * mpmath.mpf(gas.lhv)) * 3600


# -- single-pipe steady oracle ------------------------------------------

PIPE_CASES = [
    # (diameter m, length m, mass flow kg/s)
    (0.30, 10e3, 15.0), (0.30, 20e3, 20.0), (0.40, 15e3, 25.0),
    (0.40, 30e3, 30.0), (0.50, 20e3, 40.0), (0.50, 50e3, 45.0),
    (0.65, 40e3, 60.0), (0.65, 80e3, 70.0), (0.60, 60e3, 55.0),
    (0.45, 25e3, 35.0),
]


def pipe_outlet_pressure_ode(diameter, length, flow, p_in, temp,
                             roughness=1.5e-5, gas=METHANE_LIKE):
    """Adaptive integration of the isothermal squared-pressure drop along
    the pipe, independent of the network solver's discretization."""
    area = math.pi * diameter * diameter / 4.0
    re = max(abs(flow) * diameter / (area * gas.viscosity), 2320.0)
    lam = hofer_friction(re, roughness, diameter)
    c = lam * gas.r_specific * temp / (diameter * area * area) * flow * abs(flow)

    def rhs(x, y):
        p = math.sqrt(max(y[0], 1.0))
        return [-c * papay_z(p, temp, gas)]

    sol = solve_ivp(rhs, (0.0, length), [p_in * p_in], rtol=1e-11, atol=1.0)
    return float(np.sqrt(sol.y[0, -1]))


def single_pipe_model(diameter, length, roughness=1.5e-5, gas=METHANE_LIKE):
    nodes = [Node("A"), Node("B")]
    elements = [Pipe("P", "A", "B", diameter, length, roughness),
                Intake("I", "A"), Outlet("O", "B")]
    return NetworkModel(nodes, elements, gas)


def solve_single_pipe(diameter, length, flow, p_in, temp):
    model = single_pipe_model(diameter, length)
    return steady_state(model,
                        BoundarySpec(pressures={"A": p_in},
                                     node_flows={"A": flow, "B": -flow}),
                        temp=temp)


def worst_pipe_oracle_error(temp=283.15, p_in=5.0e6):
    """Largest relative pressure-drop error across the case table."""
    worst = 0.0
    for diameter, length, flow in PIPE_CASES:
        st = solve_single_pipe(diameter, length, flow, p_in, temp)
        oracle = pipe_outlet_pressure_ode(diameter, length, flow, p_in, temp)
        drop = p_in - oracle
        worst = max(worst, abs((p_in - st.node_pressure["B"]) - drop) / drop)
    return worst


def mass_conservation_error(trajectory, initial_state, w, gas):
    """Mass bookkeeping: |stored-mass change - integrated net boundary
    inflow|, relative to the total mass delivered at the outlets."""
    states = [initial_state] + list(trajectory.states)
    drift = 0.0
    throughput = 0.0
    for prev, cur in zip(states, states[1:]):
        dt = cur.time - prev.time
        drift += (cur.stored_mass - prev.stored_mass
                  - dt * cur.boundary_inflow)
        demand = sum(s.at(cur.time) for s in w.demand.values())
        throughput += dt * gas.mass_flow(demand)
    return abs(drift) / throughput
