"""Simulation result cache keyed by quantized control vectors.

Line searches revisit nearly identical points once the bracketing interval
shrinks below the quantization step; those evaluations are served from the
cache instead of burning simulation budget.
"""

from __future__ import annotations

import threading

import numpy as np


class EvaluationCache:
    def __init__(self, lower, upper, q_rel: float = 1e-3):
        self.lower = np.asarray(lower, dtype=float)
        span = np.asarray(upper, dtype=float) - self.lower
        self.step = np.where(span > 0, q_rel * span, 1.0)
        self._store: dict = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def key(self, f) -> tuple:
        q = np.round((np.asarray(f, dtype=float) - self.lower) / self.step)
        return tuple(int(v) for v in q)

    def quantize(self, f) -> np.ndarray:
        q = np.round((np.asarray(f, dtype=float) - self.lower) / self.step)
        return self.lower + q * self.step

    def get(self, f):
        k = self.key(f)
        with self._lock:
            hit = self._store.get(k)
            if hit is not None:
                self.hits += 1
            else:
                self.misses += 1
        return hit

    def put(self, f, result):
        """Insert-if-absent; returns the stored value (existing one wins)."""
        k = self.key(f)
        with self._lock:
            return self._store.setdefault(k, result)

    def __len__(self):
        return len(self._store)

    @property
    def hit_rate(self) -> float:
        total = self.hits + self.misses
        return self.hits / total if total else 0.0
