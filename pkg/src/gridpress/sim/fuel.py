"""Compressor fuel consumption from adiabatic compression power."""

from __future__ import annotations

from ..core.gas import GasSpec, papay_z


def fuel_rate(flow_nm3h: float, ratio: float, suction_p: float, temp: float,
              eta_ad: float, eta_dr: float, gas: GasSpec) -> float:
    """Fuel gas burned to drive the compression, in Nm3/h.

    Adiabatic power  P = mdot * (k/(k-1)) * Z * R * T * (h^((k-1)/k) - 1) / eta_ad
    divided by driver efficiency and the fuel's lower heating value.
    """
    if ratio < 1.0:
        raise ValueError("compression ratio must be >= 1")
    if flow_nm3h < 0:
        raise ValueError("flow must be >= 0")
    if suction_p <= 0:
        raise ValueError("suction pressure must be > 0")
    if flow_nm3h == 0.0 or ratio == 1.0:
        return 0.0
    mdot = gas.mass_flow(flow_nm3h)
    z = papay_z(suction_p, temp, gas)
    k = gas.kappa
    head = (k / (k - 1.0)) * z * gas.r_specific * temp \
        * (ratio ** ((k - 1.0) / k) - 1.0)
    power = mdot * head / eta_ad
    return power / (eta_dr * gas.lhv) * 3600.0


def station_fuel_rate(station, flow_nm3h: float, ratio: float, suction_p: float,
                      temp: float, gas: GasSpec) -> float:
    """Station-level fuel rate using machine-averaged efficiencies.

    Machine allocation happens in the regulation layer; at the planning level
    the station is treated as one aggregate compressor.
    """
    n = len(station.machines)
    eta_ad = sum(m.eta_ad for m in station.machines) / n
    eta_dr = sum(m.eta_dr for m in station.machines) / n
    return fuel_rate(flow_nm3h, ratio, suction_p, temp, eta_ad, eta_dr, gas)
