"""HTTP surface: thin FastAPI routes over the service handlers."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import service
from .sparse import MatrixMarketError

app = FastAPI(title="napspmv", version="0.1.0")


def _run(handler, req):
    try:
        return handler(req) if req is not None else handler()
    except (ValueError, MatrixMarketError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from None


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/fixtures", response_model=service.FixturesResponse)
def fixtures() -> service.FixturesResponse:
    return _run(service.handle_fixtures, None)


@app.post("/verify", response_model=service.VerifyResponse)
def verify(req: service.VerifyRequest) -> service.VerifyResponse:
    return _run(service.handle_verify, req)


@app.post("/pattern", response_model=service.PatternResponse)
def pattern(req: service.PatternRequest) -> service.PatternResponse:
    return _run(service.handle_pattern, req)


@app.post("/sweep", response_model=service.SweepResponse)
def sweep(req: service.SweepRequest) -> service.SweepResponse:
    return _run(service.handle_sweep, req)
