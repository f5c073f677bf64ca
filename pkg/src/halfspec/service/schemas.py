"""Pydantic request/response models for the HTTP service."""
from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..core import ProblemSpec, Tolerances, parse_sign


class ProblemModel(BaseModel):
    """Problem data; expression fields use the documented grammar."""
    model_config = ConfigDict(populate_by_name=True)

    p: float
    a_plus: str = "0"
    a_minus: str = "0"
    lam: float = Field(0.0, alias="lambda")
    f: str = "0"
    f_plus: str = "0"
    f_minus: str = "0"
    rho: Optional[float] = None
    K0: float = 10.0
    K1: float = 10.0

    def to_spec(self) -> ProblemSpec:
        return ProblemSpec.from_strings(
            p=self.p, a_plus=self.a_plus, a_minus=self.a_minus, lam=self.lam,
            f=self.f, f_plus=self.f_plus, f_minus=self.f_minus,
            rho=self.rho, K0=self.K0, K1=self.K1)


class TolerancesModel(BaseModel):
    eig_tol: float = 1e-9
    ode_rel: float = 1e-10
    ode_abs: float = 1e-12
    quad_tol: float = 1e-10
    bvp_tol: float = 1e-8
    defect_tol: float = 1e-6
    c_lambda_tol: float = 1e-8
    delta_ttau: float = 0.05
    zero_simple_tol: float = 1e-8
    lambda_scan_max: float = 1e6
    max_steps: int = 1_000_000
    gronwall_const: float = 100.0

    def to_tolerances(self) -> Tolerances:
        return Tolerances(**self.model_dump())


class SpectrumRequest(BaseModel):
    problem: ProblemModel
    tolerances: TolerancesModel = TolerancesModel()
    k_max: int = Field(3, ge=0, le=64)


class FucikRequest(BaseModel):
    p: float
    k: int = Field(ge=0)
    branch: Literal["+", "-"] = "+"
    alpha_plus: list[float]
    tolerances: TolerancesModel = TolerancesModel()

    def branch_sign(self) -> int:
        return parse_sign(self.branch)


class CheckRequest(BaseModel):
    problem: ProblemModel
    tolerances: TolerancesModel = TolerancesModel()
    k_max: int = Field(3, ge=0, le=64)


class SolveRequest(BaseModel):
    problem: ProblemModel
    tolerances: TolerancesModel = TolerancesModel()
    k_max: int = Field(3, ge=0, le=64)
    samples: int = Field(1025, ge=2, le=1_000_000)
    manual_bracket: Optional[tuple[float, float]] = None


class SensitivityRequest(BaseModel):
    problem: ProblemModel
    tolerances: TolerancesModel = TolerancesModel()
    k_max: int = Field(3, ge=0, le=64)


class ErrorBody(BaseModel):
    kind: Literal["config", "numeric"]
    message: str


class ErrorResponse(BaseModel):
    schema_: int = Field(1, alias="schema")
    error: ErrorBody


class PairRow(BaseModel):
    k: int
    nu: Literal["+", "-"]
    lam: float = Field(alias="lambda")
    residual: float
    model_config = ConfigDict(populate_by_name=True)


class PerK(BaseModel):
    k: int
    lambda_min: float
    lambda_max: float
    nu_min: Literal["+", "-"]
    tie: bool


class SpectrumResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    schema_: int = Field(alias="schema")
    tolerances: dict[str, Any]
    problem: dict[str, Any]
    k_max: int
    pairs: list[PairRow]
    per_k: list[PerK]


class FucikPointRow(BaseModel):
    alpha_plus: float
    alpha_minus: float
    k: int
    branch: Literal["+", "-"]
    residual: float
    found: bool
    note: str = ""


class FucikResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    schema_: int = Field(alias="schema")
    tolerances: dict[str, Any]
    p: float
    k: int
    branch: Literal["+", "-"]
    points: list[FucikPointRow]


class CheckResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    schema_: int = Field(alias="schema")
    tolerances: dict[str, Any]
    problem: dict[str, Any]
    validation: dict[str, Any]
    classification: dict[str, Any]
    landesman: dict[str, Any]


class SolutionSamples(BaseModel):
    x: list[float]
    u: list[float]
    uprime: list[float]


class SolveResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    schema_: int = Field(alias="schema")
    tolerances: dict[str, Any]
    problem: dict[str, Any]
    mode: str
    landesman: Optional[dict[str, Any]] = None
    result: dict[str, Any]
    solution: SolutionSamples
    notices: list[str] = []


class SensitivityResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    schema_: int = Field(alias="schema")
    tolerances: dict[str, Any]
    problem: dict[str, Any]
    classification: dict[str, Any]
    per_nu: dict[str, Any]
    small_ttau: dict[str, Any]
