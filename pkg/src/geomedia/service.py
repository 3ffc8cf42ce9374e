"""HTTP facade over the retrieval engine.

Error bodies are always {code, message, detail}; the code strings come
from the exception hierarchy and the status mapping below.
"""

from __future__ import annotations

import mimetypes

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel

from .context import FRAMES, GEOMAGNETIC
from .engine import RetrievalEngine
from .errors import RetrievalError

_STATUS_BY_CODE = {
    "unknown_user": 404,
    "unknown_query": 404,
    "no_candidates": 422,
    "unknown_entity": 422,
    "conflicting_temporal": 422,
    "unshown_mark": 400,
    "invalid_coordinate": 400,
    "invalid_heading": 400,
    "empty_name": 400,
    "missing_media_file": 410,
}


class ContextBody(BaseModel):
    user_id: str
    lat: float
    lon: float
    heading_deg: float
    query_time: int | None = None


class QueryBody(BaseModel):
    user_id: str
    text: str
    frame: str = GEOMAGNETIC


class MarkBody(BaseModel):
    media_id: str
    relevant: bool


class FeedbackBody(BaseModel):
    user_id: str
    query_id: str
    marks: list[MarkBody]


def _error_body(code: str, message: str, detail=None) -> dict:
    return {"code": code, "message": message, "detail": detail}


def create_app(engine: RetrievalEngine) -> FastAPI:
    app = FastAPI(title="geomedia retrieval service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RetrievalError)
    async def retrieval_error(_request: Request, exc: RetrievalError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(
            status_code=status,
            content=_error_body(exc.code, exc.message, exc.detail),
        )

    @app.exception_handler(RequestValidationError)
    async def invalid_request(_request: Request, exc: RequestValidationError):
        detail = [
            {"loc": list(e.get("loc", ())), "msg": e.get("msg"), "type": e.get("type")}
            for e in exc.errors()
        ]
        return JSONResponse(
            status_code=422,
            content=_error_body("invalid_request", "request body failed validation", detail),
        )

    @app.get("/health")
    async def health():
        return {
            "status": "ok",
            "world_version": engine.store.version,
            "facts": engine.store.fact_count,
            "media": engine.store.media_count,
            "shared_params_version": engine.params.shared.version,
        }

    @app.post("/context")
    async def set_context(body: ContextBody):
        version = engine.set_context(
            body.user_id, body.lat, body.lon, body.heading_deg, body.query_time
        )
        return {"version": version}

    @app.post("/query")
    async def query(body: QueryBody):
        if body.frame not in FRAMES:
            return JSONResponse(
                status_code=422,
                content=_error_body(
                    "invalid_frame", f"frame must be one of {sorted(FRAMES)}", body.frame
                ),
            )
        outcome = engine.query(body.user_id, body.text, body.frame)
        return {
            "query_id": outcome.query_id,
            "resolved_text": outcome.resolved_text,
            "logical_form": outcome.logical_form,
            "frame": outcome.frame,
            "params_version": outcome.params_version,
            "retrievals": [
                {
                    "media_id": r.id,
                    "kind": r.kind,
                    "uri": f"/media/{r.id}",
                    "lat": r.lat,
                    "lon": r.lon,
                    "timestamp": r.timestamp,
                }
                for r in outcome.retrievals
            ],
        }

    @app.post("/feedback")
    async def feedback(body: FeedbackBody):
        marks = [(m.media_id, m.relevant) for m in body.marks]
        version = engine.feedback(body.user_id, body.query_id, marks)
        return {"params_version": version}

    @app.get("/media/{media_id}")
    async def media(media_id: str):
        record = engine.media_record(media_id)
        if record is None:
            return JSONResponse(
                status_code=404,
                content=_error_body("unknown_media", f"no media with id {media_id!r}"),
            )
        path = engine.media_path(record)
        media_type = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        return FileResponse(path, media_type=media_type)

    return app
