"""HTTP facade over the job manager. All wire bodies are JSON, images PNG;
a static frontend is mounted at / when a built bundle is present."""

from __future__ import annotations

import base64
import io
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..canvas import image_to_data_url, rasterize, spec_from_json
from ..sampler import ResampleConfig, build_resample_plan, count_ops
from .jobs import DEFAULT_T, JobManager, QueueFull, TerminalJob, UnknownJob
from .patches import sample_patches

STRATEGY_PRESETS = ("none", "all", "start:150", "stop:100")


def strategy_listing(T: int = DEFAULT_T, lam: int = 10, repeats: int = 10) -> list[dict]:
    out = []
    for strategy in STRATEGY_PRESETS:
        plan = build_resample_plan(
            ResampleConfig(lam=lam, repeats=repeats, strategy=strategy), T
        )
        out.append(
            {
                "strategy": strategy,
                "T": T,
                "lambda": lam,
                "repeats": repeats,
                "ops": count_ops(plan).to_dict(),
            }
        )
    return out


def create_app(manager: JobManager, frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="diffpaint")
    app.state.manager = manager

    def bad_request(message: str) -> JSONResponse:
        return JSONResponse({"error": message}, status_code=400)

    @app.post("/jobs")
    async def create_job(request: Request):
        try:
            body = await request.json()
        except Exception:
            return bad_request("body must be JSON")
        if not isinstance(body, dict) or "spec" not in body:
            return bad_request("body must be {'spec': ..., 'config': ...}")
        try:
            job_id = manager.submit(body["spec"], body.get("config"))
        except QueueFull as exc:
            return JSONResponse({"error": str(exc)}, status_code=503)
        except (ValueError, KeyError, TypeError, OSError) as exc:
            return bad_request(f"malformed spec or config: {exc}")
        return {"id": job_id}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        try:
            return manager.get(job_id).to_dict()
        except UnknownJob:
            return JSONResponse({"error": "unknown job"}, status_code=404)

    @app.get("/jobs/{job_id}/result.png")
    def get_result(job_id: str):
        try:
            record = manager.get(job_id)
        except UnknownJob:
            return JSONResponse({"error": "unknown job"}, status_code=404)
        if record.state != "done" or not record.result:
            return JSONResponse({"error": f"job is {record.state}"}, status_code=404)
        return Response(manager.store.read(record.result["png"]), media_type="image/png")

    @app.get("/jobs/{job_id}/snapshots/{index}.png")
    def get_snapshot(job_id: str, index: int):
        try:
            manager.get(job_id)
            return Response(manager.store.read_snapshot(job_id, index), media_type="image/png")
        except UnknownJob:
            return JSONResponse({"error": "unknown job or snapshot"}, status_code=404)

    @app.post("/jobs/{job_id}/cancel")
    def cancel_job(job_id: str):
        try:
            return manager.cancel(job_id).to_dict()
        except UnknownJob:
            return JSONResponse({"error": "unknown job"}, status_code=404)
        except TerminalJob:
            return JSONResponse({"error": "job already finished"}, status_code=409)

    @app.get("/strategies")
    def strategies():
        return strategy_listing()

    @app.get("/patches")
    def patches():
        return [
            {"name": name, "data_url": image_to_data_url(img[:, :, :3]),
             "rgba_data_url": _rgba_data_url(img)}
            for name, img in sample_patches().items()
        ]

    @app.post("/rasterize")
    async def rasterize_echo(request: Request):
        """Echo endpoint: rasterize a composition and return the mask plus
        the landmark canvas, so clients can verify their round trip."""
        try:
            body = await request.json()
            comp = rasterize(spec_from_json(body))
        except Exception as exc:  # noqa: BLE001 - validation boundary
            return bad_request(f"malformed spec: {exc}")
        return {
            "mask": comp.mask[:, :, 0].astype(int).tolist(),
            "known_png": image_to_data_url(comp.known),
            "warnings": comp.warnings,
        }

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app


def _rgba_data_url(img_rgba: np.ndarray) -> str:
    from PIL import Image

    arr = np.clip(np.floor((img_rgba + 1.0) * 255.0 / 2.0 + 0.5), 0, 255).astype(np.uint8)
    arr[:, :, 3] = np.clip(np.floor(img_rgba[:, :, 3] * 255.0 + 0.5), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGBA").save(buf, "PNG")
    return "data:image/png;base64," + base64.b64encode(buf.getvalue()).decode()
