from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from yule_ou.models.rate_bound import RateBound


class TableRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta: float
    n: int
    T_n: float
    mean: float
    median: float
    stddev: float


class AssessmentReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    delta: float
    horizon: float
    theta: float
    rho: float
    psi: float
    p_value: float = Field(ge=0, le=1)
    p_value_display: str
    rate_bound: Optional[RateBound] = None
    rate_note: Optional[str] = None


class KernelCheckReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta: float
    horizon: float
    m: int
    var_closed_form: float
    var_quadrature: float
    contraction_value: float
    contraction_bound: float
    top_eigenvalues: list[float]
    k_trace: float
    k_trace_closed_form: float
    y11_tilde_variance: float
    y11_tilde_variance_closed_form: float


class DiscretizationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta: float
    n: int
    delta: float
    refine: int
    replications: int
    mean_delta_sq: float
    standard_error: float
    bound: float
