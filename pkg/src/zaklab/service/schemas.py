"""Pydantic request/response models for the HTTP service and the CLI client."""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator

from ..geometry import CaseId


class ClassifyRequest(BaseModel):
    k: float
    l: float
    d: int = Field(default=1, ge=1)


class ClassifyResponse(BaseModel):
    lwp: bool
    ill_flow: bool
    ill_solution: bool
    notes: str


class CaseParams(BaseModel):
    """Construction-case parameters; delta/t for box cases, T for ball cases."""

    case: CaseId
    N: int = Field(ge=1)
    d: int = Field(default=1, ge=1)
    delta: float | None = None
    t: float | None = None
    T: float | None = None


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: dict


class VerifyRequest(CaseParams):
    h: float | None = Field(
        default=None,
        gt=0,
        description="lemma grid spacing for ball sets; dimension-adapted when omitted",
    )


class VerifyResponse(BaseModel):
    case: CaseId
    N: int
    d: int
    passed: bool
    checks: list[CheckResult]


class QuadratureParams(BaseModel):
    inner_nodes: int = Field(default=8, ge=2)
    outer_nodes: int = Field(default=16, ge=2)
    time_nodes: int = Field(default=16, ge=2)
    rel_tol: float = Field(default=1e-6, gt=0)
    max_refinements: int = Field(default=6, ge=0)


class SweepRequest(BaseModel):
    case: CaseId
    k: float
    l: float
    d: int = Field(default=1, ge=1)
    n_min: int = Field(default=16, ge=2)
    n_max: int = Field(default=1024, ge=2)
    delta: float | None = None
    t: float | None = None
    T: float | None = None
    quadrature: QuadratureParams = QuadratureParams()

    @model_validator(mode="after")
    def _powers_of_two(self):
        for name, n in (("n_min", self.n_min), ("n_max", self.n_max)):
            if n & (n - 1):
                raise ValueError(f"{name}={n} must be a power of two")
        if self.n_min >= self.n_max:
            raise ValueError("n_min must be smaller than n_max")
        return self


class SweepRecordModel(BaseModel):
    N: int
    lhs: float
    rhs: float
    ratio: float


class FitModel(BaseModel):
    slope: float
    intercept: float
    r_squared: float
    n_points: int


class SweepResponse(BaseModel):
    case: CaseId
    predicted_exponent: float
    records: list[SweepRecordModel]
    fit: FitModel


class SetsPayload(BaseModel):
    """Explicit set triple in the frequency-set JSON schema."""

    A: dict
    B: dict
    R: dict


class LemmaRequest(BaseModel):
    case_params: CaseParams | None = None
    sets: SetsPayload | None = None
    h: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.case_params is None) == (self.sets is None):
            raise ValueError("provide exactly one of case_params or sets")
        return self


class LemmaResponse(BaseModel):
    lhs: float
    rhs: float
    margin: float
    method: str
    h: float | None
    applicable: bool


class SimulateRequest(BaseModel):
    d: int = Field(default=1, ge=1, le=2)
    dxi: float = Field(default=0.125, gt=0)
    M: int = Field(default=256, ge=2)
    t: float = Field(default=0.1, gt=0)
    steps: int = Field(default=100, ge=1)
    k: float = 0.0
    l: float = -0.5
    eps: float = Field(default=0.01, gt=0)
    data: str = Field(default="gaussian", pattern="^(gaussian|case)$")
    case_params: CaseParams | None = None
    amplitude: float = 1.0
    width: float = 1.0
    picard_iters: int = Field(default=3, ge=1)
    samples: int = Field(default=10, ge=1)

    @model_validator(mode="after")
    def _case_needs_params(self):
        if self.data == "case" and self.case_params is None:
            raise ValueError("data='case' requires case_params")
        return self


class SeriesPoint(BaseModel):
    t: float
    u_Hk: float
    n_Hl: float
    nt_Hlm1: float


class SimulateResponse(BaseModel):
    series: list[SeriesPoint]
    mass_initial: float
    mass_final: float
    mass_drift: float


class GateauxRequest(BaseModel):
    direction: str = Field(default="case", pattern="^(gaussian|case)$")
    case_params: CaseParams | None = None
    k: float = 0.0
    l: float = -1.0
    dxi: float = Field(default=0.0125, gt=0)
    M: int = Field(default=2400, ge=2)
    t: float = Field(default=0.1, gt=0)
    eps: float = Field(default=1e-2, gt=0)
    eps2: float | None = Field(default=None, gt=0)
    steps: int = Field(default=200, ge=1)
    s_nodes: int = Field(default=24, ge=2)
    amplitude: float = 1.0

    @model_validator(mode="after")
    def _case_needs_params(self):
        if self.direction == "case" and self.case_params is None:
            raise ValueError("direction='case' requires case_params")
        return self


class GateauxResponse(BaseModel):
    rel_gap: float
    rel_gap_eps2: float | None
    richardson_ratio: float | None
    picard_norm: float
    fd_norm: float


class ReportRequest(BaseModel):
    seed: int = Field(default=42, ge=0)
    N_values: list[int] = [8, 64, 512]
    d_values: list[int] = [1, 2, 3]
    T_values: list[float] = [1.0, 10.0]
    delta: float = 0.1
    t: float = 0.5
    random_triples: int = Field(default=50, ge=0)
    h: float | None = Field(default=None, gt=0)


class RandomLemmaSummary(BaseModel):
    count: int
    passes: int
    failures: int


class ReportResponse(BaseModel):
    verifications: list[VerifyResponse]
    random_lemma: RandomLemmaSummary
    all_passed: bool
