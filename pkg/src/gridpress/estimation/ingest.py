"""Measurement ingestion: unit mapping, plausibility validation.

The mapping database exists because field devices get reconfigured: the same
point may start reporting kNm3/h instead of Nm3/h, or gauge instead of
absolute pressure.  Every point therefore carries an affine conversion to the
model unit (Nm3/h for flows, Pa for pressures) and plausibility bounds in
that unit.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class MeasurementMapping:
    point_id: str
    target_id: str     # element or node id in the model
    variable: str      # "flow" | "pressure" | "temperature"
    scale: float
    offset: float = 0.0
    lo: float = float("-inf")
    hi: float = float("inf")
    unit: str = ""     # converted unit, informational

    def __post_init__(self):
        if self.scale == 0:
            raise ValueError(f"mapping {self.point_id}: scale must be nonzero")
        if self.lo >= self.hi:
            raise ValueError(f"mapping {self.point_id}: need lo < hi")

    def convert(self, raw: float) -> float:
        return self.scale * raw + self.offset


@dataclass(frozen=True)
class MeasurementBatch:
    timestamp: float
    readings: tuple  # of (point_id, raw value)

    def __post_init__(self):
        ids = [p for p, _ in self.readings]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate point ids in batch")
        object.__setattr__(self, "readings", tuple(self.readings))


@dataclass(frozen=True)
class Rejection:
    point_id: str
    reason: str
    raw: float | None = None


@dataclass
class MeasurementSet:
    """Accepted, converted measurements keyed by (target id, variable)."""

    timestamp: float
    values: dict = field(default_factory=dict)   # (target_id, variable) -> value
    points: dict = field(default_factory=dict)   # (target_id, variable) -> point_id

    def get(self, target_id: str, variable: str, default=None):
        return self.values.get((target_id, variable), default)

    def pressures(self) -> dict:
        return {t: v for (t, var), v in self.values.items() if var == "pressure"}

    def flows(self) -> dict:
        return {t: v for (t, var), v in self.values.items() if var == "flow"}

    def with_value(self, target_id, variable, value) -> "MeasurementSet":
        vals = dict(self.values)
        vals[(target_id, variable)] = value
        return MeasurementSet(self.timestamp, vals, dict(self.points))


def ingest(batch: MeasurementBatch, mappings):
    """Convert a raw batch to model units; returns (MeasurementSet, rejections).

    Unknown points and implausible values are rejected, never fatal.
    """
    by_point = {m.point_id: m for m in mappings}
    out = MeasurementSet(batch.timestamp)
    rejections = []
    for point_id, raw in batch.readings:
        m = by_point.get(point_id)
        if m is None:
            rejections.append(Rejection(point_id, "unmapped", raw))
            continue
        value = m.convert(raw)
        if not (m.lo <= value <= m.hi):
            rejections.append(Rejection(
                point_id,
                f"out of bounds: {value:.6g} not in [{m.lo:.6g}, {m.hi:.6g}]",
                raw))
            continue
        out.values[(m.target_id, m.variable)] = value
        out.points[(m.target_id, m.variable)] = point_id
    return out, rejections


def save_mappings(mappings, path):
    with open(path, "w") as fh:
        json.dump([{
            "point_id": m.point_id, "target_id": m.target_id,
            "variable": m.variable, "scale": m.scale, "offset": m.offset,
            "lo": m.lo, "hi": m.hi, "unit": m.unit,
        } for m in mappings], fh, indent=2)


def load_mappings(path):
    with open(path) as fh:
        data = json.load(fh)
    return [MeasurementMapping(
        d["point_id"], d["target_id"], d["variable"], d["scale"],
        d.get("offset", 0.0), d.get("lo", float("-inf")),
        d.get("hi", float("inf")), d.get("unit", "")) for d in data]


def load_batch_csv(path) -> list:
    """Read `timestamp,point_id,value` rows into batches grouped by timestamp."""
    groups: dict = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ts = float(row["timestamp"])
            groups.setdefault(ts, []).append((row["point_id"], float(row["value"])))
    return [MeasurementBatch(ts, tuple(rs)) for ts, rs in sorted(groups.items())]
