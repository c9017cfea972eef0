"""HTTP facade exposing external-oracle sessions to the labeling console.

Pull-based contract: the console polls GET /query for the pending sample,
answers with POST /label, and reads diagnostics from GET /state.  Sessions
are checkpointed as (config + answered labels) so a restart replays them
deterministically.
"""

from __future__ import annotations

import json
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import asdict
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict, Field

from . import engine
from .data import Bundle
from .prior import PriorSchedule, SCHEDULE_KINDS
from .sampler import STRATEGY_KINDS, StrategyConfig
from .svm import SolverConfig


class CreateSessionBody(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    class_name: str = Field(alias="class")
    strategy: str = "mcle"
    prior: str = "constant"
    rho_prime: float = 0.5
    burn_in: int = 10
    budget: int = 1
    max_iters: int = 300


class LabelBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    sample_id: int
    label: int


class SessionHandle:
    def __init__(self, session):
        self.session = session
        self.lock = threading.Lock()


def _error(status: int, message: str, field: str | None = None):
    detail = {"message": message}
    if field:
        detail["field"] = field
    return JSONResponse(status_code=status, content={"error": detail})


def _pca_projection(features: np.ndarray) -> np.ndarray:
    centered = features - features.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    return vt[:2].T  # (dim, 2)


def create_app(bundle: Bundle, max_sessions: int = 64,
               checkpoint_dir: str | None = None,
               console_dir: str | None = None) -> FastAPI:
    sessions: dict[str, SessionHandle] = {}
    registry_lock = threading.Lock()
    projection = _pca_projection(bundle.pool.features)

    def checkpoint_all():
        if checkpoint_dir is None:
            return
        out = Path(checkpoint_dir)
        out.mkdir(parents=True, exist_ok=True)
        for sid, handle in sessions.items():
            with handle.lock:
                s = handle.session
                payload = {
                    "session_id": sid,
                    "config": engine.run_result(s)["config"],
                    "answered": [[r.sample_id, r.label] for r in s.query_log],
                }
            (out / f"{sid}.json").write_text(json.dumps(payload, indent=2))

    def restore_checkpoints():
        if checkpoint_dir is None:
            return
        out = Path(checkpoint_dir)
        if not out.is_dir():
            return
        for path in sorted(out.glob("*.json")):
            payload = json.loads(path.read_text())
            cfg = payload["config"]
            session = engine.create_session(
                bundle, cfg["class"],
                strategy=StrategyConfig(**cfg["strategy"]),
                schedule=PriorSchedule(**cfg["schedule"]),
                solver_config=SolverConfig(**cfg["solver"]),
                oracle_kind="external", B=cfg["budget"],
                max_iters=cfg["max_iters"], session_id=payload["session_id"])
            for sample_id, label in payload["answered"]:
                engine.propose_queries(session)
                engine.submit_label(session, sample_id, label)
            sessions[payload["session_id"]] = SessionHandle(session)

    @asynccontextmanager
    async def lifespan(app):
        restore_checkpoints()
        yield
        checkpoint_all()

    app = FastAPI(lifespan=lifespan)
    app.state.checkpoint_all = checkpoint_all

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        errors = exc.errors()
        extra = [e for e in errors if e.get("type") == "extra_forbidden"]
        if extra:
            fields = ", ".join(str(e["loc"][-1]) for e in extra)
            return _error(400, f"unknown request field(s): {fields}")
        return _error(422, "invalid request body: "
                      + "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in errors))

    @app.get("/healthz")
    async def healthz():
        return JSONResponse(content="ok")

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if body.class_name not in bundle.relations.target_names:
            return _error(400, f"unknown class {body.class_name!r}", field="class")
        if body.strategy not in STRATEGY_KINDS:
            return _error(400, f"unknown strategy {body.strategy!r}", field="strategy")
        if body.prior not in SCHEDULE_KINDS:
            return _error(400, f"unknown prior schedule {body.prior!r}", field="prior")
        try:
            strategy = StrategyConfig(kind=body.strategy, rho_prime=body.rho_prime,
                                      burn_in=body.burn_in)
        except ValueError as exc:
            return _error(400, str(exc), field="rho_prime")
        with registry_lock:
            if len(sessions) >= max_sessions:
                return _error(409, f"session capacity ({max_sessions}) exceeded")
            sid = "s-" + uuid.uuid4().hex[:12]
            session = engine.create_session(
                bundle, body.class_name, strategy=strategy,
                schedule=PriorSchedule(kind=body.prior),
                oracle_kind="external", B=body.budget,
                max_iters=body.max_iters, session_id=sid)
            sessions[sid] = SessionHandle(session)
        return JSONResponse(status_code=201, content={
            "session_id": sid, "t": session.t, "status": session.status})

    def _handle(session_id: str) -> Optional[SessionHandle]:
        return sessions.get(session_id)

    @app.get("/sessions/{session_id}/query")
    def get_query(session_id: str):
        handle = _handle(session_id)
        if handle is None:
            return _error(404, f"unknown session {session_id!r}")
        with handle.lock:
            s = handle.session
            if s.status == engine.STATUS_FINISHED:
                return _error(410, "session is finished")
            pending = engine.propose_queries(s)
            nxt = next(p for p in pending if p.label is None)
            uri = ""
            if s.bundle.pool.display_uri is not None:
                uri = s.bundle.pool.display_uri[nxt.sample_id]
            return {
                "sample_id": nxt.sample_id,
                "display_uri": uri,
                "score": nxt.score,
                "intended_zone": nxt.intended_zone.value,
                "t": s.t,
                "rho": s.balance.rho,
            }

    @app.post("/sessions/{session_id}/label")
    def post_label(session_id: str, body: LabelBody):
        handle = _handle(session_id)
        if handle is None:
            return _error(404, f"unknown session {session_id!r}")
        if body.label not in (1, -1):
            return _error(422, f"label must be +1 or -1, got {body.label}", field="label")
        with handle.lock:
            s = handle.session
            if s.status == engine.STATUS_FINISHED:
                return _error(410, "session is finished")
            try:
                engine.submit_label(s, body.sample_id, body.label)
            except engine.QueryMismatch as exc:
                return _error(409, str(exc), field="sample_id")
            resp = {"t": s.t, "rho": s.balance.rho, "tracker": s.tracker.as_dict(),
                    "status": s.status}
            ap = s.curve[-1][1]
            if ap is not None:
                resp["test_ap"] = ap
            return resp

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        handle = _handle(session_id)
        if handle is None:
            return _error(404, f"unknown session {session_id!r}")
        with handle.lock:
            s = handle.session
            hist = (engine.unlabeled_zone_histogram(s)
                    if s.unlabeled_train_ids().size else
                    {"F_minus": 0, "F_zero": 0, "F_plus": 0})
            labeled_pts = [{
                "id": sid,
                "x": float(projection[:, 0] @ s.bundle.pool.features[sid]),
                "y": float(projection[:, 1] @ s.bundle.pool.features[sid]),
                "label": lab,
            } for sid, lab in sorted(s.labels.items())]
            query_pt = None
            if s.pending is not None:
                nxt = next((p for p in s.pending if p.label is None), None)
                if nxt is not None:
                    query_pt = {
                        "id": nxt.sample_id,
                        "x": float(projection[:, 0] @ s.bundle.pool.features[nxt.sample_id]),
                        "y": float(projection[:, 1] @ s.bundle.pool.features[nxt.sample_id]),
                    }
            return {
                "curve": [[t, ap] for t, ap in s.curve],
                "query_log": [asdict(r) for r in s.query_log],
                "zone_histogram": hist,
                "rho": s.balance.rho,
                "rho_prime": s.strategy.rho_prime,
                "tracker": s.tracker.as_dict(),
                "n_pos": s.balance.n_pos,
                "n_neg": s.balance.n_neg,
                "status": s.status,
                "t": s.t,
                "projection": {"labeled": labeled_pts, "query": query_pt},
            }

    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/console", StaticFiles(directory=console_dir, html=True),
                  name="console")

    return app
