"""Live elicitation service: HTTP/JSON endpoints driving one session.

One process serves one session. All mutation funnels through a single lock
and each query carries a one-time token, so duplicate or stale submissions
are rejected with 409 and at most one record exists per query.
"""
from __future__ import annotations

import threading
import uuid
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ExperimentConfig
from .iteration import QueryBundle, SessionEngine
from .landing import LandingModel
from .mdp import Trajectory
from .queries import _kde_batch
from .session import SessionFileWriter, load_session

POSTERIOR_GRID_SIZE = 61


class PreferenceBody(BaseModel):
    token: str
    choice: Literal["a", "b"]


def _trajectory_rows(traj: Trajectory, model: LandingModel) -> list[dict]:
    rows = []
    dt = model.time_step
    for step, (s_idx, a_idx) in enumerate(zip(traj.states, traj.actions)):
        state = model.state_at(s_idx)
        action = model.action_at(a_idx)
        rows.append(
            {
                "time_s": step * dt,
                "h_ft": state.h,
                "h_dot_fps": state.h_dot,
                "x_dot_fps": state.x_dot,
                "vertical_accel_fps2": action.vertical_accel,
                "horizontal_accel_fps2": action.horizontal_accel,
            }
        )
    return rows


def _bundle_payload(bundle: QueryBundle, token: str, model: LandingModel) -> dict:
    return {
        "iteration": bundle.iteration,
        "token": token,
        "time_step": model.time_step,
        "rollouts_a": [_trajectory_rows(t, model) for t in bundle.rollouts_a.trajectories],
        "rollouts_b": [_trajectory_rows(t, model) for t in bundle.rollouts_b.trajectories],
    }


def build_engine(
    config: ExperimentConfig,
    session_path: str | Path | None = None,
    model: LandingModel | None = None,
) -> SessionEngine:
    """Fresh engine, or one resumed from an existing session file."""
    if session_path is None:
        return SessionEngine(config, model=model, writer=None)
    path = Path(session_path)
    if path.exists():
        loaded = load_session(path)
        loaded.config.require_live()
        writer = SessionFileWriter(path, loaded.config, resume=True)
        engine = SessionEngine(loaded.config, model=model, writer=writer)
        engine.restore(loaded.records, loaded.history)
        return engine
    return SessionEngine(config, model=model, writer=SessionFileWriter(path, config))


def create_app(
    config: ExperimentConfig,
    session_path: str | Path | None = None,
    model: LandingModel | None = None,
) -> FastAPI:
    config.require_live()
    engine = build_engine(config, session_path, model)

    app = FastAPI(title="prefland elicitation service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    lock = threading.Lock()
    state = {"token": None}

    @app.exception_handler(RequestValidationError)
    async def _malformed(request, exc):
        return JSONResponse({"detail": "malformed request body"}, status_code=400)

    def _ensure_query() -> dict:
        bundle = engine.current_query()
        if state["token"] is None:
            state["token"] = uuid.uuid4().hex
        return _bundle_payload(bundle, state["token"], engine.model)

    @app.get("/session")
    def get_session():
        with lock:
            estimate = engine.estimate.as_array().tolist() if engine.iteration else None
            return {
                "iteration": engine.iteration,
                "max_iter": engine.config.max_iter,
                "done": engine.done,
                "method": engine.config.method,
                "records": len(engine.records),
                "estimate": estimate,
            }

    @app.get("/query")
    def get_query():
        with lock:
            if engine.done:
                return JSONResponse(
                    {"detail": "session complete", "iteration": engine.iteration},
                    status_code=404,
                )
            return _ensure_query()

    @app.post("/preference")
    def post_preference(body: PreferenceBody):
        with lock:
            if engine.done:
                return JSONResponse({"detail": "session complete"}, status_code=409)
            _ensure_query()
            if body.token != state["token"]:
                return JSONResponse(
                    {"detail": "stale or unknown query token"}, status_code=409
                )
            state["token"] = None
            engine.submit(1 if body.choice == "a" else -1)
            if not engine.done:
                _ensure_query()
            return {
                "iteration": engine.iteration,
                "done": engine.done,
                "estimate": engine.estimate.as_array().tolist(),
            }

    @app.get("/posterior")
    def get_posterior():
        with lock:
            samples = engine.samples
            axis = np.linspace(0.0, 1.0, POSTERIOR_GRID_SIZE)
            ga, gb = np.meshgrid(axis, axis, indexing="ij")
            points = np.column_stack((ga.ravel(), gb.ravel()))
            density = _kde_batch(samples.free_coords, points).reshape(ga.shape)
            return {
                "iteration": engine.iteration,
                "acceptance_rate": samples.acceptance_rate,
                "samples": samples.samples.tolist(),
                "grid": {
                    "alpha": axis.tolist(),
                    "beta": axis.tolist(),
                    "density": density.tolist(),
                },
            }

    app.state.engine = engine
    return app
