from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class RateRegime(str, Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


class DiscreteBranch(str, Enum):
    HORIZON = "horizon"  # (n delta)^(-1/2)
    MESH = "mesh"  # (n delta^2)^(1/3)
    BALANCED = "balanced"


class RateBound(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0)
    constant: float = Field(ge=0)
    regime: RateRegime
    valid_from: Optional[float] = Field(
        default=None, description="Threshold T*(theta) above which the bound applies"
    )
    relative: bool = Field(
        default=False,
        description="True when the value is a rate shape up to an unknown constant",
    )
    branch: Optional[DiscreteBranch] = None
    constituents: dict[str, float] = Field(default_factory=dict)


class MeshPlan(BaseModel):
    n: int = Field(ge=2)
    lambda_: float = Field(gt=0.5, lt=1.0, alias="lambda")
    delta: float = Field(gt=0)
    horizon: float = Field(gt=0)
    predicted_rate: float = Field(ge=0)
    branch: DiscreteBranch

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    @model_validator(mode="after")
    def _check_consistency(self) -> "MeshPlan":
        if abs(self.horizon - self.n * self.delta) > 1e-9 * self.horizon:
            raise ValueError("horizon must equal n * delta")
        return self
