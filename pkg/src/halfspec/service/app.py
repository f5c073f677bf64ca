"""FastAPI service exposing the numerical pipelines.

Run with:  uvicorn halfspec.service.app:app

Input problems validate at request time (HTTP 422 with kind="config");
numerical failures (no bracket, degenerate trajectories, scan exhaustion)
return HTTP 400 with kind="numeric" so clients can distinguish bad input
from a computation that genuinely cannot proceed.
"""
from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, pipeline
from ..core import SpecError
from ..exprlang import ExprError
from ..ivp import IvpError
from ..landesman import QuadratureError
from ..solver import ShootingError
from ..spectrum import SpectrumError
from ..variational import VariationalError
from .schemas import (CheckRequest, CheckResponse, FucikRequest,
                      FucikResponse, SensitivityRequest, SensitivityResponse,
                      SolveRequest, SolveResponse, SpectrumRequest,
                      SpectrumResponse)

_NUMERIC_ERRORS = (SpectrumError, IvpError, ShootingError, VariationalError,
                   QuadratureError)


def create_app() -> FastAPI:
    app = FastAPI(title="halfspec",
                  description="half-eigenvalues, Fucik curves and resonant "
                              "solvability for the 1-D p-Laplacian",
                  version=__version__)

    @app.exception_handler(SpecError)
    @app.exception_handler(ExprError)
    def _config_error(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=422, content={
            "schema": pipeline.SCHEMA_VERSION,
            "error": {"kind": "config", "message": str(exc)}})

    for klass in _NUMERIC_ERRORS:
        @app.exception_handler(klass)
        def _numeric_error(request: Request, exc: Exception) -> JSONResponse:
            return JSONResponse(status_code=400, content={
                "schema": pipeline.SCHEMA_VERSION,
                "error": {"kind": "numeric", "message": str(exc)}})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/spectrum", response_model=SpectrumResponse,
              response_model_by_alias=True)
    def spectrum(req: SpectrumRequest):
        tol = req.tolerances.to_tolerances()
        return pipeline.run_spectrum(req.problem.to_spec(), req.k_max, tol)

    @app.post("/fucik", response_model=FucikResponse,
              response_model_by_alias=True)
    def fucik(req: FucikRequest):
        tol = req.tolerances.to_tolerances()
        return pipeline.run_fucik(req.p, req.k, req.branch_sign(),
                                  req.alpha_plus, tol)

    @app.post("/check", response_model=CheckResponse,
              response_model_by_alias=True)
    def check(req: CheckRequest):
        tol = req.tolerances.to_tolerances()
        return pipeline.run_check(req.problem.to_spec(), req.k_max, tol)

    @app.post("/solve", response_model=SolveResponse,
              response_model_by_alias=True)
    def solve(req: SolveRequest):
        tol = req.tolerances.to_tolerances()
        return pipeline.run_solve(req.problem.to_spec(), req.k_max, tol,
                                  manual_bracket=req.manual_bracket,
                                  samples=req.samples)

    @app.post("/sensitivity", response_model=SensitivityResponse,
              response_model_by_alias=True)
    def sensitivity(req: SensitivityRequest):
        tol = req.tolerances.to_tolerances()
        return pipeline.run_sensitivity(req.problem.to_spec(), req.k_max, tol)

    return app


app = create_app()
