from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from yule_ou.models.sample_grid import SampleGrid
from yule_ou.models.scheme import Scheme


class Statistic(str, Enum):
    RHO = "rho"
    PSI = "psi"


class McConfig(BaseModel):
    """Parameters of one Monte Carlo cell: the mesh is n^(-lambda) or explicit."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False, populate_by_name=True)

    theta: float = Field(gt=0)
    n: int = Field(ge=2)
    lambda_: Optional[float] = Field(default=None, gt=0.5, lt=1.0, alias="lambda")
    delta: Optional[float] = Field(default=None, gt=0)
    replications: int = Field(ge=2)
    master_seed: int = Field(ge=0, lt=2**64)
    scheme: Scheme = Scheme.EULER
    statistic: Statistic = Statistic.RHO

    @model_validator(mode="after")
    def _check_mesh(self) -> "McConfig":
        if (self.lambda_ is None) == (self.delta is None):
            raise ValueError("exactly one of lambda and delta must be set")
        if self.scheme is Scheme.OBSERVED:
            raise ValueError("Monte Carlo runs simulate their paths")
        return self

    @property
    def grid(self) -> SampleGrid:
        if self.delta is not None:
            return SampleGrid(n=self.n, delta=self.delta)
        return SampleGrid.from_exponent(self.n, self.lambda_)
