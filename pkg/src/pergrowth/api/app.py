"""HTTP front end: one POST route per job, errors as JSON reports."""

from __future__ import annotations

import pydantic
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import service
from ..errors import PergrowthError
from .schemas import (CascadeRequest, CensusRequest, CertifyRequest, ErrorReport, ForgeRequest,
                      IntervalRequest, JobResult, KamRequest)

app = FastAPI(title="pergrowth", version="0.1.0")

_STATUS = {service.EXIT_VALIDATION: 422, service.EXIT_NUMERIC: 500}


@app.exception_handler(PergrowthError)
async def _domain_error(request: Request, exc: PergrowthError):
    rep = service.error_report(exc)
    return JSONResponse(rep.model_dump(), status_code=_STATUS[rep.error.exit_code])


@app.exception_handler(pydantic.ValidationError)
async def _model_error(request: Request, exc: pydantic.ValidationError):
    rep = service.error_report(exc)
    return JSONResponse(rep.model_dump(), status_code=422)


@app.exception_handler(RequestValidationError)
async def _request_error(request: Request, exc: RequestValidationError):
    body = {"error": {"type": "ValidationError", "message": "request failed validation",
                      "exit_code": service.EXIT_VALIDATION,
                      "details": {"errors": service._clean(list(exc.errors()))}}}
    return JSONResponse(body, status_code=422)


@app.get("/health")
def health():
    return {"status": "ok"}


_ERR = {422: {"model": ErrorReport}, 500: {"model": ErrorReport}}


@app.post("/v1/forge", response_model=JobResult, responses=_ERR)
def forge(req: ForgeRequest):
    return service.forge_job(req)


@app.post("/v1/census", response_model=JobResult, responses=_ERR)
def census(req: CensusRequest):
    return service.census_job(req)


@app.post("/v1/kam", response_model=JobResult, responses=_ERR)
def kam(req: KamRequest):
    return service.kam_job(req)


@app.post("/v1/interval", response_model=JobResult, responses=_ERR)
def interval(req: IntervalRequest):
    return service.interval_job(req)


@app.post("/v1/certify", response_model=JobResult, responses=_ERR)
def certify(req: CertifyRequest):
    return service.certify_job(req)


@app.post("/v1/cascade", response_model=JobResult, responses=_ERR)
def cascade(req: CascadeRequest):
    return service.cascade_job(req)
