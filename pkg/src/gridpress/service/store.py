"""File-backed persistence: content-addressed artifacts, append-only
hash-chained run records, and durable operator decisions.

The root directory comes from GRIDPRESS_DATA_DIR unless given explicitly.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from pathlib import Path

ENV_DATA_DIR = "GRIDPRESS_DATA_DIR"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def content_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


class DataStore:
    def __init__(self, root=None):
        if root is None:
            root = os.environ.get(ENV_DATA_DIR, "gridpress-data")
        self.root = Path(root)
        for sub in ("artifacts", "plans"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    # -- content-addressed artifacts -------------------------------------

    def put_artifact(self, obj) -> str:
        h = content_hash(obj)
        path = self.root / "artifacts" / f"{h}.json"
        if not path.exists():
            path.write_text(canonical_json(obj))
        return h

    def get_artifact(self, h: str):
        path = self.root / "artifacts" / f"{h}.json"
        if not path.exists():
            raise KeyError(h)
        return json.loads(path.read_text())

    # -- plans ------------------------------------------------------------

    def save_plan(self, plan_json: dict, series: dict | None = None,
                  latest: bool = True) -> str:
        pid = plan_json["plan_id"]
        with self._lock:
            (self.root / "plans" / f"{pid}.json").write_text(
                json.dumps(plan_json, indent=2))
            if series is not None:
                (self.root / "plans" / f"{pid}.series.json").write_text(
                    json.dumps(series))
            if latest:
                (self.root / "plans" / "latest").write_text(pid)
        return pid

    def load_plan_series(self, plan_id: str) -> dict:
        path = self.root / "plans" / f"{plan_id}.series.json"
        if not path.exists():
            raise KeyError(plan_id)
        return json.loads(path.read_text())

    def load_plan(self, plan_id: str) -> dict:
        path = self.root / "plans" / f"{plan_id}.json"
        if not path.exists():
            raise KeyError(plan_id)
        return json.loads(path.read_text())

    def latest_plan_id(self) -> str | None:
        path = self.root / "plans" / "latest"
        return path.read_text().strip() if path.exists() else None

    def latest_plan(self) -> dict | None:
        pid = self.latest_plan_id()
        return self.load_plan(pid) if pid else None

    # -- append-only hash-chained run records -----------------------------

    def append_run(self, record: dict) -> str:
        """Chain each record to its predecessor; returns the record hash."""
        with self._lock:
            record = dict(record)
            record["prev"] = self._last_hash("runs.jsonl")
            record["hash"] = content_hash(record)
            self._append_line("runs.jsonl", record)
        return record["hash"]

    def run_records(self) -> list:
        return self._read_lines("runs.jsonl")

    def verify_chain(self) -> bool:
        prev = None
        for rec in self.run_records():
            body = {k: v for k, v in rec.items() if k != "hash"}
            if rec.get("prev") != prev or content_hash(body) != rec.get("hash"):
                return False
            prev = rec["hash"]
        return True

    # -- durable operator decisions ---------------------------------------

    def append_decision(self, decision: dict):
        with self._lock:
            self._append_line("decisions.jsonl", dict(decision))

    def decisions(self) -> list:
        return self._read_lines("decisions.jsonl")

    def activation_map(self) -> dict:
        """Replay the decision log to station id -> active flag."""
        active = {}
        for d in self.decisions():
            active[d["station"]] = bool(d["active"])
        return active

    # -- helpers -----------------------------------------------------------

    def _append_line(self, name: str, obj: dict):
        with (self.root / name).open("a") as fh:
            fh.write(canonical_json(obj) + "\n")

    def _read_lines(self, name: str) -> list:
        path = self.root / name
        if not path.exists():
            return []
        return [json.loads(line) for line in path.read_text().splitlines()
                if line.strip()]

    def _last_hash(self, name: str):
        lines = self._read_lines(name)
        return lines[-1]["hash"] if lines else None
