"""HTTP scoring service.

Endpoints:
    GET  /v1/health            -> {"status": "ok", "model_variant": ...}
    POST /v1/score             -> ranked sentences + no-answer probability
    GET  /v1/listings          -> fixture catalog for the demo UI
    GET  /v1/listings/{id}     -> one fixture listing, sentences pre-split

The model is immutable for the process lifetime; requests never mutate
state, so any request concurrency is safe. Scoring goes through exactly
the same library call as offline evaluation.
"""

from __future__ import annotations

import os
import time
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from marketqa import datapipe, textproc
from marketqa.ranker import Model, input_from_example

ENV_PREFIX = "MQA_"


class RequestError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _parse_history(raw) -> list[tuple[str, str]]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise RequestError(422, "history must be a list of {speaker, text} objects")
    history = []
    for item in raw:
        if (not isinstance(item, dict) or not isinstance(item.get("speaker"), str)
                or not isinstance(item.get("text"), str)):
            raise RequestError(422, "history entries need string 'speaker' and 'text'")
        history.append((item["speaker"], item["text"]))
    return history


def _parse_score_request(body, model: Model):
    if not isinstance(body, dict):
        raise RequestError(422, "request body must be a JSON object")
    question = body.get("question")
    if not isinstance(question, str) or not question.strip():
        raise RequestError(422, "'question' must be a non-empty string")
    has_desc = body.get("description") is not None
    has_cands = body.get("candidates") is not None
    if has_desc == has_cands:
        raise RequestError(422, "provide exactly one of 'description' or 'candidates'")
    if has_desc:
        if not isinstance(body["description"], str):
            raise RequestError(422, "'description' must be a string")
        sentences = textproc.split_sentences(body["description"])
    else:
        cands = body["candidates"]
        if (not isinstance(cands, list)
                or any(not isinstance(c, str) for c in cands)):
            raise RequestError(422, "'candidates' must be a list of strings")
        sentences = [c for c in cands if c.strip()]
    history = _parse_history(body.get("history"))
    truncated = len(sentences) > model.config.max_candidates
    sentences = sentences[:model.config.max_candidates]
    return question, history, sentences, truncated


def _load_fixtures(fixtures_dir) -> dict[str, dict]:
    path = Path(fixtures_dir) / "listings.jsonl"
    if not path.exists():
        raise FileNotFoundError(f"fixture catalog not found: {path}")
    catalog = {}
    for listing in datapipe.read_listings(path):
        catalog[listing.listing_id] = {
            "id": listing.listing_id,
            "title": listing.title,
            "sentences": textproc.split_sentences(listing.description),
        }
    return catalog


def create_app(model: Model, fixtures_dir=None, cors_origin: str | None = None,
               ui_dir=None) -> FastAPI:
    app = FastAPI(title="marketqa scoring service")
    catalog = _load_fixtures(fixtures_dir) if fixtures_dir else {}
    variant = model.config.variant_name()

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware
        app.add_middleware(CORSMiddleware, allow_origins=[cors_origin],
                           allow_methods=["*"], allow_headers=["*"])

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "model_variant": variant}

    @app.post("/v1/score")
    async def score(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body is not valid JSON")
        try:
            question, history, sentences, truncated = _parse_score_request(body, model)
        except RequestError as exc:
            return _error(exc.status, exc.message)
        started = time.perf_counter()
        inp = input_from_example(history, question, sentences, model.config)
        result = model.score_prepared(model.prepare(inp))
        latency_ms = (time.perf_counter() - started) * 1000.0
        order = sorted(range(1, len(sentences) + 1),
                       key=lambda i: (-result.probs[i], i))
        return {
            "no_answer_prob": float(result.probs[0]),
            "answers": [
                {
                    "index": i - 1,
                    "sentence": sentences[i - 1],
                    "prob": float(result.probs[i]),
                    "raw_score": float(result.scores[i]),
                }
                for i in order
            ],
            "model_variant": variant,
            "latency_ms": latency_ms,
            "truncated": truncated,
        }

    @app.get("/v1/listings")
    def listings():
        return [catalog[key] for key in sorted(catalog)]

    @app.get("/v1/listings/{listing_id}")
    def listing(listing_id: str):
        entry = catalog.get(listing_id)
        if entry is None:
            return _error(404, f"unknown listing {listing_id!r}")
        return entry

    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def env_default(name: str, fallback=None):
    """Service flags can be overridden via MQA_* environment variables."""
    return os.environ.get(ENV_PREFIX + name.upper(), fallback)


def serve(model_path, port: int, fixtures_dir=None, cors_origin=None,
          ui_dir=None, host: str = "127.0.0.1") -> None:
    """Load the checkpoint and run the service until interrupted."""
    import uvicorn

    from marketqa.checkpoint import load_checkpoint

    model = load_checkpoint(model_path)
    app = create_app(model, fixtures_dir=fixtures_dir, cors_origin=cors_origin,
                     ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
