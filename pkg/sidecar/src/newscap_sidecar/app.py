"""FastAPI application exposing the evaluation-backend wire protocol.

Endpoints (all batched, positionally aligned with their request lists):

- POST /v1/embed/sentence     {"texts": [...]} -> {"dim": int, "vectors": [...]}
- POST /v1/embed/tokens       {"texts": [...]} -> {"vectors": [[[...]]]}
- POST /v1/embed/visual-text  {"texts": [...]} -> {"dim": int, "vectors": [...]}
- POST /v1/nli                {"pairs": [{"premise","hypothesis"}]} -> {"entailment": [...]}
- POST /v1/ner                {"texts": [...]} -> {"entities": [[{"surface","type"}]]}
- GET  /v1/info               -> {"kinds", "identity", "dim", "nli_derivation", ...}

Schema violations and over-limit batches return 400.  Model forward passes
are serialized behind a per-bundle lock; request handling itself is
concurrent and stateless.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .models import NLI_DERIVATION

DEFAULT_BATCH_LIMIT = 32

KINDS = (
    "sentence-embedder",
    "token-embedder",
    "visual-text-embedder",
    "nli-scorer",
    "entity-extractor",
)


class TextsRequest(BaseModel):
    texts: list[str]


class NliPair(BaseModel):
    premise: str
    hypothesis: str


class NliRequest(BaseModel):
    pairs: list[NliPair]


def create_app(bundle, batch_limit: int = DEFAULT_BATCH_LIMIT) -> FastAPI:
    app = FastAPI(title="newscap-sidecar")
    lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def _schema_violation(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    def check_batch(n: int):
        if n > batch_limit:
            raise HTTPException(
                status_code=400,
                detail=f"batch size {n} exceeds limit {batch_limit}",
            )

    @app.post("/v1/embed/sentence")
    def embed_sentence(req: TextsRequest):
        check_batch(len(req.texts))
        with lock:
            vectors = bundle.embed_sentences(req.texts)
        return {"dim": bundle.dims["sentence"], "vectors": vectors}

    @app.post("/v1/embed/tokens")
    def embed_tokens(req: TextsRequest):
        check_batch(len(req.texts))
        with lock:
            vectors = bundle.embed_tokens(req.texts)
        return {"vectors": vectors}

    @app.post("/v1/embed/visual-text")
    def embed_visual_text(req: TextsRequest):
        check_batch(len(req.texts))
        with lock:
            vectors = bundle.embed_visual_text(req.texts)
        return {"dim": bundle.dims["visual-text"], "vectors": vectors}

    @app.post("/v1/nli")
    def nli(req: NliRequest):
        check_batch(len(req.pairs))
        pairs = [(p.premise, p.hypothesis) for p in req.pairs]
        with lock:
            scores = bundle.nli(pairs)
        return {"entailment": scores}

    @app.post("/v1/ner")
    def ner(req: TextsRequest):
        check_batch(len(req.texts))
        with lock:
            entities = bundle.ner(req.texts)
        return {"entities": entities}

    @app.get("/v1/info")
    def info():
        return {
            "kinds": list(KINDS),
            "identity": bundle.identity,
            "dim": bundle.dims,
            "batch_limit": batch_limit,
            "nli_derivation": NLI_DERIVATION,
        }

    return app
