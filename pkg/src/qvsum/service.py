"""Minimal HTTP inference service over a loaded checkpoint and manifest."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .checkpoint import load_checkpoint
from .data import load_dataset
from .errors import ConfigurationError
from .fusion import DEFAULT_THRESHOLD


@dataclass
class ServiceConfig:
    checkpoint_path: str
    manifest_path: str
    host: str = "127.0.0.1"
    port: int = 8000
    threshold: int = DEFAULT_THRESHOLD

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ConfigurationError(f"port {self.port} outside [1, 65535]")
        for path in (self.checkpoint_path, self.manifest_path):
            if not os.path.exists(path):
                raise ConfigurationError(f"missing file: {path}")


class SummarizeRequest(BaseModel):
    query: str
    video_id: str
    threshold: Optional[int] = None


def create_app(config: ServiceConfig) -> FastAPI:
    model = load_checkpoint(config.checkpoint_path)
    dataset = load_dataset(config.manifest_path)
    app = FastAPI(title="query-driven frame summarizer")

    @app.exception_handler(RequestValidationError)
    async def bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error_code": "bad_request",
                                     "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/videos")
    def videos():
        out = []
        for vid in dataset.video_ids():
            pairs = dataset.by_video(vid)
            out.append({
                "video_id": vid,
                "original_length": pairs[0].frames.original_length,
                "query_hint": pairs[0].query,
            })
        return out

    @app.post("/summarize")
    def summarize(req: SummarizeRequest):
        if not req.query.strip():
            return JSONResponse(status_code=400,
                                content={"error_code": "empty_query"})
        pairs = dataset.by_video(req.video_id)
        if not pairs:
            return JSONResponse(status_code=404,
                                content={"error_code": "unknown_video"})
        threshold = req.threshold if req.threshold is not None \
            else config.threshold
        if threshold not in (1, 2, 3):
            return JSONResponse(status_code=400,
                                content={"error_code": "bad_threshold"})
        tokens = dataset.tokenizer.encode(req.query)
        result = model.summarize(tokens, pairs[0].frames, threshold=threshold)
        # Byte-identical to the CLI's summarize document.
        return Response(content=result.to_json(),
                        media_type="application/json")

    return app
