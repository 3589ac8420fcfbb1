import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class SampleGrid(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    n: int = Field(ge=2, description="Number of steps; the grid holds n + 1 instants")
    delta: float = Field(gt=0, description="Mesh between consecutive instants")
    t0: float = Field(default=0.0, description="First instant (non-zero only for ingested data)")

    @classmethod
    def from_exponent(cls, n: int, lambda_: float) -> "SampleGrid":
        return cls(n=n, delta=float(n) ** (-lambda_))

    @property
    def horizon(self) -> float:
        return self.n * self.delta

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.delta * np.arange(self.n + 1, dtype=np.float64)
