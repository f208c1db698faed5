"""Equal-load flow split across a station's active machines."""

from __future__ import annotations


class InfeasibleLoadError(ValueError):
    def __init__(self, msg, nearest_feasible: float):
        super().__init__(msg)
        self.nearest_feasible = nearest_feasible


def balance_machines(total_flow: float, machines) -> dict:
    """Split ``total_flow`` (Nm3/h) equally, minimally adjusted to respect
    each machine's [f_min, f_max] (water-filling).

    Returns machine id -> share; shares sum to the total exactly.  Raises
    InfeasibleLoadError (carrying the nearest feasible total) when the total
    falls outside [sum f_min, sum f_max].
    """
    machines = list(machines)
    if not machines:
        raise InfeasibleLoadError("no active machines", 0.0)
    lo = sum(m.f_min for m in machines)
    hi = sum(m.f_max for m in machines)
    if total_flow < lo - 1e-9 or total_flow > hi + 1e-9:
        nearest = min(max(total_flow, lo), hi)
        hint = "; consider bypass" if total_flow < lo else ""
        raise InfeasibleLoadError(
            f"total flow {total_flow:.6g} outside feasible range "
            f"[{lo:.6g}, {hi:.6g}]{hint}", nearest)

    shares = {m.id: None for m in machines}
    free = list(machines)
    remaining = total_flow
    # iteratively pin machines whose equal share violates a bound
    while free:
        target = remaining / len(free)
        pinned = False
        for m in list(free):
            if target < m.f_min - 1e-12:
                shares[m.id] = m.f_min
                remaining -= m.f_min
                free.remove(m)
                pinned = True
            elif target > m.f_max + 1e-12:
                shares[m.id] = m.f_max
                remaining -= m.f_max
                free.remove(m)
                pinned = True
        if not pinned:
            for m in free:
                shares[m.id] = target
            remaining = 0.0
            break
    # exactness: dump any float residue on the least-constrained machine
    drift = total_flow - sum(shares.values())
    if abs(drift) > 0:
        mid = max(machines, key=lambda m: m.f_max - shares[m.id]).id
        shares[mid] += drift
    return shares
