import logging
from typing import List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from app.catalog import operators as ops
from app.catalog.identities import catalog_detail, catalog_summary
from app.config import configure_logging
from app.errors import (
    BoundaryError,
    ConfigError,
    DegenerateMetricError,
    Quad4Error,
    UnknownEntryError,
)
from app.geometry.tetra import geometry_report
from app.schemas.reports import (
    CatalogDetail,
    CatalogSummary,
    GeometryReport,
    HealthResponse,
    PotentialsReport,
    SpectrumReport,
    SuiteReport,
    plain_witness,
)
from app.schemas.requests import GeometryRequest, PotentialsRequest, SpectrumRequest, VerifyRequest
from app.spectral import qes
from app.verify.runner import SuiteContext
from app.verify.suites import SUITES, run_suite, suite_names

"""
HTTP SURFACE
- Read-only endpoints over the catalog, the QES sector, tetrahedron geometry
  and the verification suites
- Suites run in fast mode unless the request asks otherwise
- Quad4Error maps to HTTPException in one place (_http_error)
"""

configure_logging()
logger = logging.getLogger(__name__)

ALLOWED_ORIGINS = [
    "http://localhost:3000",
    "http://127.0.0.1:3000",
]

app = FastAPI(title="Four-Body Radial Operators")

app.add_middleware(
    CORSMiddleware,
    allow_origins=ALLOWED_ORIGINS,
    allow_credentials=True,
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["*"],
    expose_headers=["*"],
)


@app.options("/{full_path:path}")
async def options_handler(full_path: str):
    return Response(
        status_code=200,
        headers={
            "Access-Control-Allow-Origin": ALLOWED_ORIGINS[0],
            "Access-Control-Allow-Methods": "GET, POST, OPTIONS",
            "Access-Control-Allow-Headers": "*",
            "Access-Control-Allow-Credentials": "true",
        },
    )


def _http_error(exc: Quad4Error) -> HTTPException:
    if isinstance(exc, (ConfigError, UnknownEntryError)):
        status = 404 if isinstance(exc, UnknownEntryError) else 400
    elif isinstance(exc, (BoundaryError, DegenerateMetricError)):
        status = 422
    else:
        status = 500
    logger.warning("[HTTP] %s: %s", type(exc).__name__, exc)
    detail = {"error": type(exc).__name__, "message": str(exc)}
    if exc.witness is not None:
        detail["witness"] = plain_witness(exc.witness)
    return HTTPException(status_code=status, detail=detail)


@app.get("/health", response_model=HealthResponse)
def health():
    return HealthResponse(catalog_entries=len(ops.identifiers()), suites=suite_names())


@app.get("/catalog", response_model=List[CatalogSummary])
def list_catalog():
    return [catalog_summary(identifier) for identifier in ops.identifiers()]


@app.get("/catalog/{identifier}", response_model=CatalogDetail)
def show_catalog(identifier: str):
    try:
        return catalog_detail(identifier)
    except Quad4Error as e:
        raise _http_error(e)


@app.post("/spectrum", response_model=SpectrumReport)
def spectrum(payload: SpectrumRequest):
    try:
        return qes.qes_spectrum(qes.qes_matrix(payload), bits=payload.precision_bits)
    except Quad4Error as e:
        raise _http_error(e)


@app.post("/potentials", response_model=PotentialsReport)
def potentials(payload: PotentialsRequest):
    try:
        return qes.potentials_report(payload, payload.point)
    except Quad4Error as e:
        raise _http_error(e)


@app.post("/geometry", response_model=GeometryReport)
def geometry(payload: GeometryRequest):
    try:
        return geometry_report(payload.point, payload.masses)
    except Quad4Error as e:
        raise _http_error(e)


@app.post("/verify/{suite}", response_model=SuiteReport)
def verify(suite: str, payload: Optional[VerifyRequest] = None):
    payload = payload or VerifyRequest()
    if suite not in SUITES:
        # "all" stays on the command line; it runs for minutes
        raise HTTPException(status_code=404, detail=f"unknown suite {suite!r}; choose one of {sorted(SUITES)}")
    ctx = SuiteContext.from_settings(fast=payload.fast, seed=payload.seed)
    try:
        report = run_suite(suite, ctx)
    except Quad4Error as e:
        raise _http_error(e)
    if not report.passed:
        logger.warning("[HTTP] suite %s: %d identities failed", suite, len(report.failures))
    return report
