"""The HTTP service: relevance scoring, claim verification, rewrite proxying.

Contract summary: malformed bodies answer 400, scoring routes answer 503
until models are loaded, upstream rewrite failures answer 502 with the
upstream status embedded in the detail, and GET /healthz answers 200 only
when the models are loaded. All routes are stateless: responses depend
only on the request body and static config.
"""

from __future__ import annotations

from contextlib import asynccontextmanager

import httpx
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from . import models
from .config import SidecarConfig


class RelevanceBody(BaseModel):
    query: str
    texts: list[str] = Field(min_length=1)

    @field_validator("texts")
    @classmethod
    def texts_non_blank(cls, value: list[str]) -> list[str]:
        if any(not item.strip() for item in value):
            raise ValueError("texts entries must be non-empty")
        return value


class VerifyBody(BaseModel):
    claim: str
    evidence: list[str] = Field(min_length=1)

    @field_validator("claim")
    @classmethod
    def claim_non_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("claim must be non-empty")
        return value


class RewriteBody(BaseModel):
    prompt: str
    query: str | None = None
    documents: list[str] = Field(min_length=1)

    @field_validator("prompt")
    @classmethod
    def prompt_non_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("prompt must be non-empty")
        return value

    @field_validator("documents")
    @classmethod
    def documents_non_blank(cls, value: list[str]) -> list[str]:
        if any(not item.strip() for item in value):
            raise ValueError("documents entries must be non-empty")
        return value


def create_app(
    config: SidecarConfig,
    *,
    load_models: bool = True,
    upstream_transport: httpx.AsyncBaseTransport | None = None,
) -> FastAPI:
    """Build the service around a static config.

    Models load here so a process with an unloadable identifier refuses
    to start. ``load_models=False`` starts degraded: scoring routes and
    the health check answer 503. The transport override lets tests fake
    the upstream LLM without a network.
    """
    bundle = (
        models.load_models(config.relevance_model, config.verifier_model)
        if load_models
        else None
    )

    headers = {}
    if config.upstream_api_key:
        headers["Authorization"] = f"Bearer {config.upstream_api_key}"

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.upstream = httpx.AsyncClient(
            headers=headers, timeout=config.timeout_seconds, transport=upstream_transport
        )
        yield
        await app.state.upstream.aclose()

    app = FastAPI(title="scoring-sidecar", lifespan=lifespan)
    app.state.config = config
    app.state.bundle = bundle

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError) -> JSONResponse:
        errors = exc.errors()
        first = errors[0] if errors else {}
        location = ".".join(
            str(part) for part in first.get("loc", ()) if part != "body"
        )
        message = first.get("msg", "invalid body")
        detail = "malformed request"
        if location:
            detail += f": {location}"
        detail += f": {message}"
        return JSONResponse(status_code=400, content={"detail": detail})

    def require_bundle() -> models.ModelBundle:
        if app.state.bundle is None:
            raise HTTPException(status_code=503, detail="models not loaded")
        return app.state.bundle

    @app.post("/relevance")
    def relevance(body: RelevanceBody) -> dict:
        bundle = require_bundle()
        scores: list[float] = []
        for start in range(0, len(body.texts), config.max_batch_size):
            chunk = body.texts[start : start + config.max_batch_size]
            scores.extend(bundle.relevance.score(body.query, chunk))
        return {"scores": scores}

    @app.post("/verify")
    def verify(body: VerifyBody) -> dict:
        bundle = require_bundle()
        return {"label": bundle.verifier.classify(body.claim, body.evidence)}

    @app.post("/rewrite")
    async def rewrite(body: RewriteBody) -> dict:
        payload = {
            "prompt": body.prompt,
            "query": body.query,
            "documents": body.documents,
            "temperature": config.temperature,
        }
        try:
            response = await app.state.upstream.post(config.upstream_url, json=payload)
        except httpx.HTTPError as err:
            raise HTTPException(status_code=502, detail=f"upstream unreachable: {err}")
        if response.status_code != 200:
            raise HTTPException(
                status_code=502, detail=f"upstream status {response.status_code}"
            )
        try:
            data = response.json()
        except ValueError:
            data = None
        text = data.get("text") if isinstance(data, dict) else None
        if not isinstance(text, str):
            raise HTTPException(
                status_code=502, detail="upstream response lacked a text field"
            )
        return {"text": text}

    @app.get("/healthz")
    def healthz() -> JSONResponse:
        if app.state.bundle is None:
            return JSONResponse(status_code=503, content={"status": "degraded"})
        return JSONResponse(status_code=200, content={"status": "ok"})

    return app
