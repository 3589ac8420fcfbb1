from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class YuleMode(str, Enum):
    DISCRETE = "discrete"
    QUADRATURE = "quadrature"


class YuleResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    y11: float = Field(ge=-1e-12)
    y12: float
    y22: float = Field(ge=-1e-12)
    rho: float = Field(ge=-1.0, le=1.0)
    psi: Optional[float] = Field(
        default=None, description="sqrt(theta * T_n) * rho, set when theta is known"
    )
    horizon: float = Field(gt=0)
    n: int = Field(ge=2)
    mode: YuleMode
