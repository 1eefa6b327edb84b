"""HTTP API for the review loop.

Everything the UI shows is recomputed from stored artifacts; the service
holds no state of its own. The what-if preview recomputes the selection
server-side from the stored trace so a threshold slider never has to
reimplement the cutting-line logic client-side.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import (
    BindError,
    DuplicateRunId,
    SmokescanError,
    StoreError,
    UnknownRun,
    UnknownUnit,
)
from .filtering import read_trace_jsonl
from .store import SCHEMA_VERSION, Store, Verdict

API_SCHEMA = SCHEMA_VERSION


@dataclass(frozen=True)
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    static_path: str | None = None
    auth_token: str | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port {self.port} outside [1, 65535]")


class VerdictBody(BaseModel):
    unit: int
    predicted_label: bool
    human_label: bool
    reviewer: str = "anonymous"


class CorrectionBody(BaseModel):
    value: float


def _run_summary(record) -> dict:
    return {
        "run_id": record.run_id,
        "source_id": record.source_id,
        "kind": record.kind,
        "created_at": record.created_at,
        "threshold": record.threshold,
        "unit_count": record.unit_count,
    }


def create_app(store: Store, config: ApiConfig | None = None) -> FastAPI:
    config = config or ApiConfig()
    app = FastAPI(title="smokescan", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def on_validation(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(SmokescanError)
    async def on_pipeline_error(_req: Request, exc: SmokescanError):
        if isinstance(exc, (UnknownRun, UnknownUnit)):
            status = 404
        elif isinstance(exc, DuplicateRunId):
            status = 409
        elif isinstance(exc, StoreError):
            status = 500
        else:
            status = 400
        return JSONResponse(status_code=status, content={"error": str(exc)})

    if config.auth_token:

        @app.middleware("http")
        async def check_token(request: Request, call_next):
            if request.url.path.startswith("/api/") and (
                request.headers.get("x-auth-token") != config.auth_token
            ):
                return JSONResponse(status_code=401, content={"error": "bad or missing token"})
            return await call_next(request)

    @app.get("/api/runs")
    def list_runs():
        return {
            "schema_version": API_SCHEMA,
            "runs": [_run_summary(r) for r in store.list_runs()],
        }

    @app.get("/api/runs/{run_id}")
    def run_detail(run_id: str):
        record = store.get_run(run_id)
        return {"schema_version": API_SCHEMA, **record.to_manifest()}

    @app.get("/api/runs/{run_id}/trace")
    def run_trace(run_id: str):
        tf = _load_trace(store, run_id)
        points = [
            {"i": i, "t": tf.timestamps[i], "sim": v}
            for i, v in enumerate(tf.trace.values)
        ]
        return {"schema_version": API_SCHEMA, "header": tf.header, "points": points}

    @app.get("/api/runs/{run_id}/frames/{index}")
    def run_frame(run_id: str, index: int):
        store.get_run(run_id)  # 404 on unknown run
        path = store.run_path(run_id) / "frames" / f"{index:05d}.png"
        if not path.is_file():
            raise UnknownUnit(f"no frame {index} stored for run {run_id!r}")
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.get("/api/runs/{run_id}/preview")
    def preview(run_id: str, correction: float):
        tf = _load_trace(store, run_id)
        values = tf.trace.values
        threshold = sum(values) / len(values) + correction
        indices = [i for i, v in enumerate(values) if v > threshold]
        return {
            "schema_version": API_SCHEMA,
            "run_id": run_id,
            "correction": correction,
            "threshold": threshold,
            "indices": indices,
        }

    @app.post("/api/runs/{run_id}/verdicts")
    def post_verdict(run_id: str, body: VerdictBody):
        stored = store.submit_verdict(
            Verdict(
                run_id=run_id,
                unit=body.unit,
                predicted_label=body.predicted_label,
                human_label=body.human_label,
                reviewer=body.reviewer,
            )
        )
        return {"schema_version": API_SCHEMA, "stored": stored.to_json()}

    @app.get("/api/runs/{run_id}/verdicts")
    def get_verdicts(run_id: str):
        latest = store.latest_verdicts(run_id)
        return {
            "schema_version": API_SCHEMA,
            "latest": {str(unit): v.to_json() for unit, v in sorted(latest.items())},
            "history_length": len(store.verdict_history(run_id)),
        }

    @app.patch("/api/config/correction")
    def patch_correction(body: CorrectionBody):
        version = store.update_correction(body.value)
        return {
            "schema_version": API_SCHEMA,
            "version": version,
            "key": "correction",
            "value": body.value,
        }

    @app.get("/api/config/correction")
    def get_correction():
        current = store.current_config()
        return {
            "schema_version": API_SCHEMA,
            "value": current.get("correction", 0.0),
            "version": len(store.config_history()),
        }

    @app.get("/api/export/feedback")
    def export_feedback(runs: str | None = None):
        ids = [r for r in runs.split(",") if r] if runs else None
        export = store.export_feedback(ids)
        return export.to_json()

    if config.static_path:
        static = Path(config.static_path)
        if static.is_dir():
            app.mount("/", StaticFiles(directory=static, html=True), name="ui")

    return app


def _load_trace(store: Store, run_id: str):
    path = store.artifact_path(run_id, "trace")
    if not path.is_file():
        raise UnknownRun(f"run {run_id!r} has no trace artifact")
    return read_trace_jsonl(path)


def serve(store: Store, config: ApiConfig) -> None:
    """Run the API until interrupted; uvicorn handles graceful shutdown."""
    import uvicorn

    app = create_app(store, config)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    except OSError as exc:
        raise BindError(f"cannot bind {config.host}:{config.port}: {exc}") from exc
