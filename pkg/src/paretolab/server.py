"""Local HTTP service exposing campaign operations to the companion UI.

Reads may run concurrently; mutations are serialized through a single
lock per campaign and persisted atomically before the response returns.
"""

from __future__ import annotations

import threading

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import campaign, fls
from .cli import status_view
from .errors import InvalidArgument, NotFound


class MeasurementBody(BaseModel):
    point_id: int
    hardness: float
    inverse_elasticity: float
    note: str = ""


class OverrideBody(BaseModel):
    point_id: int


def create_app(campaign_path: str) -> FastAPI:
    app = FastAPI(title="paretolab campaign service")
    state = campaign.load_from_file(campaign_path)
    write_lock = threading.Lock()
    step_lock = threading.Lock()

    def persist():
        campaign.save_to_file(state, campaign_path)

    @app.get("/status")
    def get_status():
        return status_view(state)

    @app.get("/points")
    def get_points():
        classes = state.classes
        widths = (
            None if state.low is None else np.linalg.norm(state.high - state.low, axis=1)
        )
        out = []
        for p in state.points:
            rec = {
                "id": p.id,
                "c_pvp10": p.c_pvp10,
                "c_pvp40": p.c_pvp40,
                "c_pvp360": p.c_pvp360,
                "spin_speed": p.spin_speed,
                "dilution": p.dilution,
                "sampled": p.id in state.measurements,
                "classification": campaign.CLASS_NAMES[
                    int(classes[p.id]) if classes is not None else 0
                ],
                "predicted_hardness": (
                    None if state.means is None else float(state.means[p.id, 0])
                ),
                "predicted_inverse_elasticity": (
                    None if state.means is None else float(state.means[p.id, 1])
                ),
                "region_width": None if widths is None else float(widths[p.id]),
            }
            out.append(rec)
        return {"points": out}

    @app.get("/suggestions")
    def get_suggestions():
        if state.low is None:
            return {"suggestions": [], "converged": False}
        pts = campaign.suggest_batch(state, state.batch_size)
        return {
            "suggestions": [
                {
                    "id": p.id,
                    "c_pvp10": p.c_pvp10,
                    "c_pvp40": p.c_pvp40,
                    "c_pvp360": p.c_pvp360,
                    "spin_speed": p.spin_speed,
                    "dilution": p.dilution,
                }
                for p in pts
            ],
            "converged": state.converged,
        }

    @app.post("/measurements")
    def post_measurement(body: MeasurementBody):
        with write_lock:
            try:
                campaign.ingest(
                    state,
                    campaign.Measurement(
                        point_id=body.point_id,
                        hardness=body.hardness,
                        inverse_elasticity=body.inverse_elasticity,
                        note=body.note,
                    ),
                )
            except NotFound as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            except InvalidArgument as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            persist()
        return {"ok": True, "sampled": len(state.measurements)}

    @app.post("/override")
    def post_override(body: OverrideBody):
        with write_lock:
            try:
                campaign.record_override(state, body.point_id)
            except NotFound as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            except InvalidArgument as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            persist()
        return {"ok": True, "pending_overrides": state.pending_overrides}

    @app.post("/step")
    def post_step():
        if not step_lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a step is already running")
        try:
            with write_lock:
                try:
                    artifacts = campaign.step(state)
                except InvalidArgument as exc:
                    raise HTTPException(status_code=400, detail=str(exc))
                persist()
            view = status_view(state)
            view["suggestions"] = [p.id for p in artifacts.suggestions]
            return view
        finally:
            step_lock.release()

    @app.get("/report")
    def get_report():
        if state.classes is None:
            return {"statements": [], "markdown": ""}
        statements, report = campaign.explain(state)
        return {"statements": report.records, "markdown": report.markdown}

    @app.get("/embedding")
    def get_embedding():
        with write_lock:
            if state.embedding is None:
                state.embedding = campaign.grid_embedding(state)
                persist()
        return {
            "embedding": [
                {"id": p.id, "x": float(state.embedding[p.id, 0]), "y": float(state.embedding[p.id, 1])}
                for p in state.points
            ]
        }

    @app.get("/log")
    def get_log():
        return {"log": state.log}

    return app
