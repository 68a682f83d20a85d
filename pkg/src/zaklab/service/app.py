"""FastAPI application exposing the laboratory operations.

Domain errors map onto HTTP statuses: malformed or unsupported inputs give
400, numerical failures (quadrature non-convergence, evolution blow-up)
give 500; claim failures are ordinary 200 responses with ``passed: false``.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import (
    AliasingError,
    DimensionMismatchError,
    LatticeCoverageError,
    QuadratureError,
    ResolutionError,
    StabilityError,
    UnsupportedShapeError,
    ZakLabError,
)
from . import handlers
from . import schemas as sc

app = FastAPI(
    title="zaklab",
    description=(
        "Numerical laboratory for Zakharov-system regularity experiments: "
        "region classification, certified resonance ranges, convolution "
        "lower bounds, scaling sweeps, and pseudospectral cross-validation."
    ),
    version="0.1.0",
)

_BAD_INPUT = (
    DimensionMismatchError,
    UnsupportedShapeError,
    ResolutionError,
    LatticeCoverageError,
    AliasingError,
    ValueError,
)
_NUMERICAL = (QuadratureError, StabilityError)


@app.exception_handler(ZakLabError)
@app.exception_handler(ValueError)
async def _domain_error(request: Request, exc: Exception) -> JSONResponse:
    if isinstance(exc, _NUMERICAL):
        return JSONResponse(
            status_code=500,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )
    if isinstance(exc, _BAD_INPUT):
        return JSONResponse(
            status_code=400,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )
    return JSONResponse(
        status_code=500, content={"error": type(exc).__name__, "detail": str(exc)}
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/classify", response_model=sc.ClassifyResponse)
def classify(req: sc.ClassifyRequest) -> sc.ClassifyResponse:
    return handlers.classify(req)


@app.post("/verify", response_model=sc.VerifyResponse)
def verify(req: sc.VerifyRequest) -> sc.VerifyResponse:
    return handlers.verify(req)


@app.post("/sweep", response_model=sc.SweepResponse)
def sweep(req: sc.SweepRequest) -> sc.SweepResponse:
    return handlers.sweep(req)


@app.post("/lemma", response_model=sc.LemmaResponse)
def lemma(req: sc.LemmaRequest) -> sc.LemmaResponse:
    return handlers.lemma(req)


@app.post("/simulate", response_model=sc.SimulateResponse)
def simulate(req: sc.SimulateRequest) -> sc.SimulateResponse:
    return handlers.simulate(req)


@app.post("/gateaux", response_model=sc.GateauxResponse)
def gateaux(req: sc.GateauxRequest) -> sc.GateauxResponse:
    return handlers.gateaux(req)


@app.post("/report", response_model=sc.ReportResponse)
def report(req: sc.ReportRequest) -> sc.ReportResponse:
    return handlers.report(req)
