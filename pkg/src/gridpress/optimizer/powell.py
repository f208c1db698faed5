"""Powell conjugate-direction minimization with budgeted line searches.

Classic 1964 scheme: per iteration a sweep of line searches over the
direction set, then possible replacement of the direction of largest
single-sweep decrease by the net displacement (subject to Powell's
acceptance test), with a forced reset of the basis to unit vectors every
``reset_period`` iterations to avoid linear dependence.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class Budget:
    max_evals: int = 180
    max_seconds: float = 900.0

    def start(self):
        return _BudgetClock(self)


class _BudgetClock:
    def __init__(self, budget: Budget):
        self.budget = budget
        self.t0 = time.monotonic()

    def exhausted(self, evals: int) -> bool:
        if evals >= self.budget.max_evals:
            return True
        return time.monotonic() - self.t0 >= self.budget.max_seconds


class FunctionEvaluator:
    """Adapter giving a plain scalar function the evaluator protocol."""

    @dataclass(frozen=True)
    class Result:
        value: float

    def __init__(self, fn):
        self.fn = fn
        self.evaluations = 0

    def __call__(self, x):
        self.evaluations += 1
        return self.Result(float(self.fn(np.asarray(x, dtype=float))))


@dataclass
class PowellState:
    point: np.ndarray
    value: float
    directions: np.ndarray
    iteration: int
    best_point: np.ndarray
    best_value: float
    evaluations: int
    stop_reason: str = ""
    history: list = field(default_factory=list)  # best value after each sweep


def _feasible_interval(x, d, lower, upper):
    """Largest [alo, ahi] with x + alpha d inside the box."""
    alo, ahi = -np.inf, np.inf
    for xi, di, lo, hi in zip(x, d, lower, upper):
        if di > 0:
            alo = max(alo, (lo - xi) / di)
            ahi = min(ahi, (hi - xi) / di)
        elif di < 0:
            alo = max(alo, (hi - xi) / di)
            ahi = min(ahi, (lo - xi) / di)
    if not np.isfinite(alo):
        alo = -1e12
    if not np.isfinite(ahi):
        ahi = 1e12
    return min(alo, 0.0), max(ahi, 0.0)


def line_search(x0, value0, direction, evaluator, tol, lower, upper,
                clock=None, initial_step=None):
    """Bracketing plus golden-section along x0 + alpha*direction.

    Returns (alpha, value, flat) with value <= value0; ``flat`` set when no
    improving step was found.  ``tol`` is relative to the feasible span.
    """
    d = np.asarray(direction, dtype=float)
    nd = float(np.linalg.norm(d))
    if nd == 0:
        raise ValueError("line search direction must be nonzero")
    x0 = np.asarray(x0, dtype=float)
    alo, ahi = _feasible_interval(x0, d, lower, upper)
    span = ahi - alo
    if span <= 0:
        return 0.0, value0, True

    cache = {0.0: value0}

    def f(a):
        if a in cache:
            return cache[a]
        v = evaluator(x0 + a * d).value
        cache[a] = v
        return v

    def out_of_budget():
        return clock is not None and clock.exhausted(evaluator.evaluations)

    h0 = initial_step if initial_step else 0.05 * span
    bracket = None
    h = h0
    # shrink the probe step when neither side improves: the minimum may sit
    # closer to the start than the first probe
    while bracket is None and h > max(tol * span, 1e-15) and not out_of_budget():
        for sign in (1.0, -1.0):
            if out_of_budget():
                break
            a_prev, f_prev = 0.0, value0
            a_cur = min(max(sign * h, alo), ahi)
            if a_cur == 0.0:
                continue
            f_cur = f(a_cur)
            if f_cur >= f_prev:
                continue
            # expand until the function turns up or the box edge is hit
            while not out_of_budget():
                a_next = a_cur + sign * max(abs(a_cur), h) * 2.0
                a_next = min(max(a_next, alo), ahi)
                if a_next == a_cur:
                    bracket = (a_prev, a_cur, a_cur)
                    break
                f_next = f(a_next)
                if f_next >= f_cur:
                    bracket = (a_prev, a_cur, a_next) if sign > 0 \
                        else (a_next, a_cur, a_prev)
                    break
                a_prev, f_prev = a_cur, f_cur
                a_cur, f_cur = a_next, f_next
            if bracket is None and out_of_budget():
                bracket = (min(a_prev, a_cur), a_cur, max(a_prev, a_cur))
            if bracket is not None:
                break
        h /= 8.0

    if bracket is None:
        return 0.0, value0, True

    a, _, c = bracket
    a, c = min(a, c), max(a, c)
    if c > a:
        # golden-section shrink on [a, c]
        x1 = c - GOLDEN * (c - a)
        x2 = a + GOLDEN * (c - a)
        f1, f2 = f(x1), f(x2)
        while (c - a) > tol * span and not out_of_budget():
            if f1 <= f2:
                c, x2, f2 = x2, x1, f1
                x1 = c - GOLDEN * (c - a)
                f1 = f(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + GOLDEN * (c - a)
                f2 = f(x2)
    best_a = min(cache, key=lambda k: (cache[k], abs(k)))
    best_v = cache[best_a]
    if best_v >= value0:
        return 0.0, value0, True
    return best_a, best_v, False


def powell_minimize(f0, evaluator, lower, upper, budget: Budget,
                    tol: float = 1e-6, tol_line: float = 1e-3,
                    reset_period: int | None = None) -> PowellState:
    """Minimize over the box [lower, upper] starting from f0.

    Termination: evaluation/wall-clock budget, or relative improvement below
    ``tol`` over a full sweep.  Returns the best point seen.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    x = np.clip(np.asarray(f0, dtype=float), lower, upper)
    n = len(x)
    if reset_period is None:
        reset_period = n
    clock = budget.start()

    directions = np.eye(n)
    fx = evaluator(x).value
    best_x, best_f = x.copy(), fx
    state = PowellState(x, fx, directions, 0, best_x, best_f,
                        evaluator.evaluations)

    it = 0
    stalls = 0
    stop = ""
    while True:
        if clock.exhausted(evaluator.evaluations):
            stop = "budget"
            break
        x_start, f_start = x.copy(), fx
        biggest_dec, biggest_i = 0.0, -1
        for i in range(n):
            if clock.exhausted(evaluator.evaluations):
                break
            a, fnew, flat = line_search(x, fx, directions[i], evaluator,
                                        tol_line, lower, upper, clock)
            dec = fx - fnew
            if dec > biggest_dec:
                biggest_dec, biggest_i = dec, i
            x = np.clip(x + a * directions[i], lower, upper)
            fx = fnew
        it += 1
        if fx < best_f:
            best_f, best_x = fx, x.copy()
        state.history.append(best_f)

        if clock.exhausted(evaluator.evaluations):
            stop = "budget"
            break
        if 2.0 * (f_start - fx) <= tol * (abs(f_start) + abs(fx) + 1e-30):
            stalls += 1
            if stalls >= 2:
                stop = "converged"
                break
            # one more try from a fresh axis-aligned basis before giving up
            directions = np.eye(n)
            continue
        stalls = 0

        d_new = x - x_start
        if biggest_i >= 0 and float(np.linalg.norm(d_new)) > 0:
            x_e = np.clip(x_start + 2.0 * d_new, lower, upper)
            f_e = evaluator(x_e).value
            if f_e < best_f:
                best_f, best_x = f_e, x_e.copy()
            if f_e < f_start:
                t = 2.0 * (f_start - 2.0 * fx + f_e) \
                    * (f_start - fx - biggest_dec) ** 2 \
                    - biggest_dec * (f_start - f_e) ** 2
                if t < 0.0:
                    a, fnew, flat = line_search(x, fx, d_new, evaluator,
                                                tol_line, lower, upper, clock)
                    x = np.clip(x + a * d_new, lower, upper)
                    fx = fnew
                    if fx < best_f:
                        best_f, best_x = fx, x.copy()
                    directions = np.vstack([directions[:biggest_i],
                                            directions[biggest_i + 1:],
                                            d_new / np.linalg.norm(d_new)])
        if it % reset_period == 0:
            directions = np.eye(n)

    state.point = x
    state.value = fx
    state.directions = directions
    state.iteration = it
    state.best_point = best_x
    state.best_value = best_f
    state.evaluations = evaluator.evaluations
    state.stop_reason = stop
    return state
