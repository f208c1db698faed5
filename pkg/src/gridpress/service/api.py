"""HTTP API for the dispatcher console.

The service is a storage-and-transfer layer: plans are produced by the
scheduler (or by explicit optimize jobs) and the API serves snapshots.
What-if jobs run in a bounded worker pool with their own evaluation caches,
so exploration never touches the production plan or its cache; operator
activation decisions are durable (append-only log, replayed on restart) and
take effect in the next planning cycle.
"""

from __future__ import annotations

import logging
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..core.series import TimeSeries
from ..estimation.ingest import MeasurementBatch, ingest
from ..regulation.mileage import MachineLedger, mileage_suggestion
from .runner import build_plan_inputs, extract_point_series
from .scenario import Scenario
from .store import DataStore

log = logging.getLogger("gridpress.api")


class ServiceContext:
    def __init__(self, scenario: Scenario, store: DataStore,
                 max_workers: int = 4):
        self.scenario = scenario
        self.store = store
        self.model = scenario.load_model()
        self.mappings = scenario.load_mappings()
        self.pool = ThreadPoolExecutor(max_workers=max_workers)
        self.jobs: dict = {}
        self.jobs_lock = threading.Lock()
        self.decision_lock = threading.Lock()
        self.pending_decisions: dict = {}   # station -> requested active flag
        self.inputs_lock = threading.Lock()
        self._inputs = None                 # latest PlanInputs
        self._estimation = None

    # -- latest estimated inputs ----------------------------------------

    def latest_inputs(self, refresh: bool = False):
        with self.inputs_lock:
            if self._inputs is None or refresh:
                self._inputs = build_plan_inputs(
                    self.scenario, activation=self.store.activation_map())
            return self._inputs

    def ingest_batch(self, batch: MeasurementBatch):
        measurements, rejections = ingest(batch, self.mappings)
        with self.inputs_lock:
            self._inputs = build_plan_inputs(
                self.scenario, t0=batch.timestamp, batch=batch,
                activation=self.store.activation_map())
        return measurements, rejections

    # -- jobs ------------------------------------------------------------

    def submit_job(self, kind: str, overrides: dict, publish: bool) -> str:
        job_id = uuid.uuid4().hex[:12]
        with self.jobs_lock:
            self.jobs[job_id] = {"id": job_id, "kind": kind,
                                 "status": "queued", "submitted": time.time(),
                                 "overrides": overrides, "result": None,
                                 "error": None}
        self.pool.submit(self._run_job, job_id, overrides, publish)
        return job_id

    def _run_job(self, job_id: str, overrides: dict, publish: bool):
        with self.jobs_lock:
            self.jobs[job_id]["status"] = "running"
        try:
            result = self._optimize(overrides, publish)
            with self.jobs_lock:
                self.jobs[job_id].update(status="done", result=result)
        except Exception as exc:
            log.exception("job %s failed", job_id)
            with self.jobs_lock:
                self.jobs[job_id].update(status="failed", error=str(exc))
        finally:
            if publish:
                with self.decision_lock:
                    self.pending_decisions.clear()

    def _optimize(self, overrides: dict, publish: bool) -> dict:
        sc = self.scenario
        inputs = self.latest_inputs()
        cfg = type(sc.optimizer)(**vars(sc.optimizer))
        for k in ("budget_evals", "budget_seconds"):
            if k in overrides:
                setattr(cfg, k, overrides[k])
        w = inputs.w
        pf = float(overrides.get("intake_pressure_factor", 1.0))
        df = float(overrides.get("demand_factor", 1.0))
        if pf != 1.0 or df != 1.0:
            w = type(w)(
                w.t0, w.horizon,
                {k: TimeSeries(s.times, tuple(v * df for v in s.values),
                               s.interp) for k, s in w.demand.items()},
                {k: TimeSeries(s.times, tuple(v * pf for v in s.values),
                               s.interp) for k, s in w.pressure.items()},
                w.temperature, w.provenance)
        activation = dict(self.store.activation_map())
        activation.update(overrides.get("activation", {}))
        inputs = type(inputs)(inputs.model, inputs.state, w,
                              inputs.estimation_report, inputs.rejections,
                              inputs.snapshot_hash)

        from ..optimizer.repetitive import repetitive_step
        grid = sc.grid(w.t0)
        forced = {sid for sid, on in activation.items() if not on}
        cold = sc.baseline_control(grid).values if sc.baseline else None
        plan = repetitive_step(None, inputs.model, inputs.state, w, grid,
                               cfg, forced_bypass=forced, cold_start=cold)
        series = extract_point_series(plan, inputs, self.mappings)
        self.store.save_plan(plan.to_json(), series=series, latest=publish)
        if publish:
            self.store.append_run({
                "plan_id": plan.plan_id,
                "snapshot_hash": inputs.snapshot_hash,
                "t0": w.t0,
                "evaluations": plan.lineage.get("evaluations"),
                "objective": plan.objective,
                "value": plan.value,
                "decisions": sorted(activation.items()),
            })
        return {
            "plan_id": plan.plan_id,
            "objective": plan.objective,
            "penalty": plan.penalty,
            "value": plan.value,
            "violations": len(plan.violations),
            "evaluations": plan.lineage.get("evaluations"),
            "stop_reason": plan.lineage.get("stop_reason"),
            "budget_limited": plan.lineage.get("stop_reason") == "budget",
            "published": publish,
        }


def create_app(scenario: Scenario, store: DataStore | None = None,
               max_workers: int = 4) -> FastAPI:
    ctx = ServiceContext(scenario, store or DataStore(),
                         max_workers=max_workers)
    app = FastAPI(title="gridpress", version="1.0")
    app.state.ctx = ctx
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/network")
    def get_network():
        return ctx.model.to_json()

    @app.get("/state/latest")
    def get_state_latest():
        inputs = ctx.latest_inputs()
        return {"state": inputs.state.to_json(),
                "estimation": inputs.estimation_report.to_json(),
                "rejections": [{"point_id": r.point_id, "reason": r.reason,
                                "raw": r.raw} for r in inputs.rejections]}

    @app.post("/measurements")
    def post_measurements(body: dict):
        try:
            readings = tuple((str(p), float(v))
                             for p, v in body["readings"])
            batch = MeasurementBatch(float(body["timestamp"]), readings)
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(400, f"malformed measurement batch: {exc}")
        measurements, rejections = ctx.ingest_batch(batch)
        return {"accepted": len(measurements.values),
                "rejected": [{"point_id": r.point_id, "reason": r.reason,
                              "raw": r.raw} for r in rejections]}

    @app.get("/forecast")
    def get_forecast(horizon: float | None = None):
        inputs = ctx.latest_inputs()
        w = inputs.w
        t1 = w.t0 + min(horizon or w.horizon, w.horizon)

        def clip(s: TimeSeries):
            pts = [(t, v) for t, v in zip(s.times, s.values) if t <= t1]
            return {"times": [p[0] for p in pts],
                    "values": [p[1] for p in pts], "interp": s.interp}

        return {"t0": w.t0, "horizon": t1 - w.t0,
                "demand": {k: clip(s) for k, s in w.demand.items()},
                "pressure": {k: clip(s) for k, s in w.pressure.items()},
                "provenance": dict(w.provenance)}

    @app.get("/plan/latest")
    def get_plan_latest():
        plan = ctx.store.latest_plan()
        if plan is None:
            raise HTTPException(404, "no plan published yet")
        return plan

    @app.get("/plan/{plan_id}")
    def get_plan(plan_id: str):
        try:
            return ctx.store.load_plan(plan_id)
        except KeyError:
            raise HTTPException(404, f"unknown plan {plan_id!r}")

    @app.post("/optimize", status_code=202)
    def post_optimize(body: dict | None = None):
        overrides = dict(body or {})
        unknown = set(overrides) - {"budget_evals", "budget_seconds",
                                    "intake_pressure_factor", "demand_factor",
                                    "activation"}
        if unknown:
            raise HTTPException(400, f"unknown override keys: {sorted(unknown)}")
        job_id = ctx.submit_job("what-if", overrides, publish=False)
        return {"job_id": job_id, "status": "queued"}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        with ctx.jobs_lock:
            job = ctx.jobs.get(job_id)
            if job is None:
                raise HTTPException(404, f"unknown job {job_id!r}")
            return dict(job)

    @app.get("/mileage")
    def get_mileage():
        out = []
        for st in ctx.model.stations():
            ledger = MachineLedger(st.id,
                                   {m.id: m.odometer for m in st.machines})
            s = mileage_suggestion(ledger)
            out.append({"station_id": st.id,
                        "hours": ledger.hours,
                        "suggestion": s.to_json() if s else None})
        return {"stations": out,
                "activation": ctx.store.activation_map()}

    @app.post("/operator/activation", status_code=202)
    def post_activation(body: dict):
        try:
            station = str(body["station"])
            active = bool(body["active"])
        except (KeyError, TypeError) as exc:
            raise HTTPException(400, f"malformed decision: {exc}")
        if not any(st.id == station for st in ctx.model.stations()):
            raise HTTPException(404, f"unknown station {station!r}")
        with ctx.decision_lock:
            pending = ctx.pending_decisions.get(station)
            if pending is not None and pending != active:
                raise HTTPException(
                    409, f"conflicting decision pending for {station!r}: "
                         f"active={pending}")
            ctx.pending_decisions[station] = active
            ctx.store.append_decision({
                "station": station, "active": active,
                "note": body.get("note", ""), "time": time.time()})
        job_id = ctx.submit_job("activation",
                                {"activation": {station: active}},
                                publish=True)
        return {"job_id": job_id, "station": station, "active": active,
                "status": "queued"}

    @app.get("/trajectory/{plan_id}")
    def get_trajectory(plan_id: str, point: str | None = None):
        if plan_id == "latest":
            plan_id = ctx.store.latest_plan_id()
            if plan_id is None:
                raise HTTPException(404, "no plan published yet")
        try:
            series = ctx.store.load_plan_series(plan_id)
        except KeyError:
            raise HTTPException(404, f"no trajectory for plan {plan_id!r}")
        if point is None:
            return series
        s = series["points"].get(point)
        if s is None:
            raise HTTPException(404, f"unknown measurement point {point!r}")
        return {"plan_id": plan_id, "point": point,
                "discard_before": series["discard_before"], **s}

    return app
