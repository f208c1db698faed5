"""Gas property formulas: compressibility, friction, and the gas spec record."""

from __future__ import annotations

import math
from dataclasses import dataclass

# Papay correlation constants (widely published variant).
PAPAY_A = 3.52
PAPAY_B = 2.26
PAPAY_C = 0.274
PAPAY_D = 1.878

RE_LAMINAR = 2320.0


@dataclass(frozen=True)
class GasSpec:
    """Bulk gas properties used throughout the solver.

    All values SI.  ``normal_density`` converts between volumetric flow at
    normal conditions (Nm3) and mass.
    """

    p_crit: float          # critical pressure, Pa
    t_crit: float          # critical temperature, K
    r_specific: float      # specific gas constant, J/(kg K)
    kappa: float           # isentropic exponent
    lhv: float             # lower heating value, J/Nm3
    normal_density: float  # kg/Nm3
    viscosity: float = 1.1e-5  # dynamic viscosity, Pa s

    def __post_init__(self):
        for name in ("p_crit", "t_crit", "r_specific", "lhv",
                     "normal_density", "viscosity"):
            if getattr(self, name) <= 0:
                raise ValueError(f"GasSpec.{name} must be > 0")
        if self.kappa <= 1:
            raise ValueError("GasSpec.kappa must be > 1")

    def mass_flow(self, flow_nm3h: float) -> float:
        """Nm3/h -> kg/s."""
        return flow_nm3h * self.normal_density / 3600.0

    def volumetric_flow(self, mass_kgps: float) -> float:
        """kg/s -> Nm3/h."""
        return mass_kgps * 3600.0 / self.normal_density


#: Methane-like transmission gas used by the bundled reference scenario.
METHANE_LIKE = GasSpec(
    p_crit=4.60e6,
    t_crit=190.6,
    r_specific=518.3,
    kappa=1.31,
    lhv=35.8e6,
    normal_density=0.717,
)


def papay_z(p: float, t: float, gas: GasSpec) -> float:
    """Compressibility factor from the two-parameter Papay correlation.

    Z = 1 - 3.52 p_r exp(-2.26 T_r) + 0.274 p_r^2 exp(-1.878 T_r)
    """
    if t <= 0:
        raise ValueError("temperature must be > 0 K")
    if p < 0:
        raise ValueError("pressure must be >= 0")
    pr = p / gas.p_crit
    tr = t / gas.t_crit
    return 1.0 - PAPAY_A * pr * math.exp(-PAPAY_B * tr) \
        + PAPAY_C * pr * pr * math.exp(-PAPAY_D * tr)


def papay_dz_dp(p: float, t: float, gas: GasSpec) -> float:
    """Partial derivative of papay_z with respect to pressure."""
    if t <= 0:
        raise ValueError("temperature must be > 0 K")
    pr = p / gas.p_crit
    tr = t / gas.t_crit
    return (-PAPAY_A * math.exp(-PAPAY_B * tr)
            + 2.0 * PAPAY_C * pr * math.exp(-PAPAY_D * tr)) / gas.p_crit


def hofer_friction(re: float, k: float, d: float) -> float:
    """Darcy friction factor by the explicit Hofer approximation.

    Falls back to the laminar 64/Re law below Re = 2320.
    """
    if d <= 0:
        raise ValueError("diameter must be > 0")
    if k < 0:
        raise ValueError("roughness must be >= 0")
    if re <= 0:
        raise ValueError("Reynolds number must be > 0")
    if re < RE_LAMINAR:
        return 64.0 / re
    arg = (4.518 / re) * math.log10(re / 7.0) + k / (3.71 * d)
    return (-2.0 * math.log10(arg)) ** -2


def friction_regime(re: float) -> str:
    return "laminar" if re < RE_LAMINAR else "turbulent"
