"""HTTP service: encode an image once, then answer prompt queries from cache.

Sessions hold the dense features of one backbone pass; every /segment call
against a session is pooling + text matching only, asserted by the
``backbone_passes`` counter exposed in /v1/health.
"""

from __future__ import annotations

import base64
import io
import threading
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from PIL import Image
from pydantic import BaseModel, Field

from ..denoiser import default_palette
from ..denoiser.pipeline import Pipeline
from ..featurizer.text import BACKGROUND_PROMPT, encode_text_queries
from ..runconfig import config_hash
from ..types import TextQuerySet
from .rle import encode_rle
from .store import SessionStore


@dataclass
class ServiceSettings:
    max_upload_bytes: int = 8 * 1024 * 1024
    session_ttl: float = 900.0
    max_sessions: int = 64
    template_set: str = "imagenet80"
    cors_origins: tuple = ("*",)


class SegmentRequest(BaseModel):
    prompts: list[str]
    gamma: float | None = Field(default=None, ge=-1.0, le=1.0)
    delta: float | None = Field(default=None, ge=0.0, le=1.0)
    background: bool | None = None


@dataclass
class _QueryCache:
    """Per-prompt embedding rows, so repeated prompts skip the text tower."""

    backbone: object
    template_set: str
    _rows: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def embed(self, prompt: str) -> np.ndarray:
        with self._lock:
            row = self._rows.get(prompt)
        if row is None:
            qs = encode_text_queries([prompt], self.template_set, self.backbone,
                                     background=False)
            row = qs.embeddings[0]
            with self._lock:
                self._rows[prompt] = row
        return row

    def query_set(self, prompts, background: bool) -> TextQuerySet:
        rows = np.stack([self.embed(p) for p in prompts])
        bg_index = None
        if background:
            lowered = [p.strip().lower() for p in prompts]
            bg_index = lowered.index(BACKGROUND_PROMPT)
        return TextQuerySet(
            prompts=tuple(prompts),
            embeddings=rows,
            has_background=background,
            template_set=self.template_set,
            background_index=bg_index,
        )


def _overlay_png(labels_grid: np.ndarray, palette: np.ndarray, display_h: int,
                 display_w: int, transparent_index: int | None) -> str:
    rows, cols = labels_grid.shape
    ry = np.clip(((np.arange(display_h) + 0.5) * rows / display_h - 0.5).round(), 0, rows - 1)
    rx = np.clip(((np.arange(display_w) + 0.5) * cols / display_w - 0.5).round(), 0, cols - 1)
    expanded = labels_grid[ry.astype(int)[:, None], rx.astype(int)[None, :]]
    rgba = np.zeros((display_h, display_w, 4), dtype=np.uint8)
    rgba[:, :, :3] = palette[expanded]
    rgba[:, :, 3] = 150
    if transparent_index is not None:
        rgba[expanded == transparent_index, 3] = 0
    buf = io.BytesIO()
    Image.fromarray(rgba, mode="RGBA").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def create_app(pipeline: Pipeline, settings: ServiceSettings | None = None) -> FastAPI:
    settings = settings or ServiceSettings()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.ready = True  # model is loaded eagerly by the caller
        yield
        app.state.ready = False

    app = FastAPI(
        title="dinoiser service", version="1.0", openapi_url="/v1/openapi.json",
        lifespan=lifespan,
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(settings.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(ttl=settings.session_ttl, max_sessions=settings.max_sessions)
    queries = _QueryCache(backbone=pipeline.backbone, template_set=settings.template_set)
    app.state.pipeline = pipeline
    app.state.store = store
    app.state.ready = False

    resolved = {
        "gamma": pipeline.config.gamma,
        "delta": pipeline.config.delta,
        "backbone_id": pipeline.backbone.backbone_id,
        "checkpoint_id": pipeline.checkpoint_id,
        "template_set": settings.template_set,
    }
    app.state.config_hash = config_hash(resolved)

    @app.get("/v1/health")
    def health():
        if not app.state.ready:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return {
            "status": "ok",
            "backbone_id": pipeline.backbone.backbone_id,
            "checkpoint_id": pipeline.checkpoint_id,
            "config_hash": app.state.config_hash,
            "backbone_passes": pipeline.backbone_passes,
            "sessions": len(store),
        }

    @app.get("/v1/spec")
    def openapi_spec():
        return JSONResponse(app.openapi())

    @app.post("/v1/sessions", status_code=201)
    async def create_session(request: Request):
        payload = await request.body()
        if len(payload) > settings.max_upload_bytes:
            raise HTTPException(413, detail="image exceeds upload size limit")
        try:
            image = Image.open(io.BytesIO(payload))
            image.load()
        except Exception:
            raise HTTPException(415, detail="payload is not a decodable image")
        started = time.perf_counter()
        encoding, _ = pipeline.encode(image)
        session = store.create(
            encoding, display_h=image.height, display_w=image.width
        )
        grid = encoding.grid
        return {
            "session_id": session.id,
            "grid": {
                "n_rows": grid.n_rows,
                "n_cols": grid.n_cols,
                "patch_size": grid.patch_size,
                "n": grid.n,
            },
            "timing_ms": round((time.perf_counter() - started) * 1000.0, 3),
        }

    @app.post("/v1/sessions/{session_id}/segment")
    def segment_session(session_id: str, body: SegmentRequest):
        session = store.get(session_id)
        if session is None:
            raise HTTPException(404, detail="unknown or expired session")
        prompts = [p for p in body.prompts if isinstance(p, str) and p.strip()]
        if not prompts:
            raise HTTPException(422, detail="need at least one non-empty prompt")

        background_added = False
        want_background = body.background
        lowered = [p.strip().lower() for p in prompts]
        if want_background is None:
            want_background = BACKGROUND_PROMPT in lowered
        if want_background and BACKGROUND_PROMPT not in lowered:
            prompts = prompts + [BACKGROUND_PROMPT]
            background_added = True

        query_set = queries.query_set(prompts, background=bool(want_background))
        overrides = {"background": bool(want_background) or None}
        if body.gamma is not None:
            overrides["gamma"] = body.gamma
        if body.delta is not None:
            overrides["delta"] = body.delta
        if want_background is False:
            overrides["background"] = False
        scoped = pipeline.with_config(**overrides)
        # cached features only: no pipeline.encode call on this path
        result, _ = scoped.patch_inference(session.encoding, None, query_set)

        grid = result.grid
        labels_grid = result.labels.reshape(grid.n_rows, grid.n_cols)
        palette = default_palette(len(prompts))
        counts = np.bincount(result.labels, minlength=len(prompts))
        coverage = {p: round(100.0 * counts[i] / grid.n, 4) for i, p in enumerate(prompts)}
        summary = {
            p: {
                "mean": float(result.scores[:, i].mean()),
                "max": float(result.scores[:, i].max()),
            }
            for i, p in enumerate(prompts)
        }
        return {
            "session_id": session_id,
            "prompts": prompts,
            "background_added": background_added,
            "background_index": query_set.background_index,
            "grid": {"n_rows": grid.n_rows, "n_cols": grid.n_cols, "n": grid.n},
            "labels_rle": encode_rle(result.labels),
            "length": grid.n,
            "coverage_percent": coverage,
            "scores_summary": summary,
            "palette": ["#{:02x}{:02x}{:02x}".format(*rgb) for rgb in palette],
            "overlay_png_base64": _overlay_png(
                labels_grid, palette, session.display_h, session.display_w,
                query_set.background_index,
            ),
            "config": {
                "gamma": scoped.config.gamma,
                "delta": scoped.config.delta,
                "background": bool(want_background),
                "config_hash": app.state.config_hash,
            },
        }

    return app
