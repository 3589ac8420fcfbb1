from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from yule_ou.models.sample_grid import SampleGrid
from yule_ou.models.scheme import Scheme


class PathPair(BaseModel):
    """Two aligned trajectories sampled on the same uniform grid.

    The arrays are made read-only on construction so a pair can be handed
    between threads freely.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: SampleGrid
    x1: np.ndarray
    x2: np.ndarray
    scheme: Scheme
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    x0: Optional[float] = Field(
        default=0.0, description="Initial condition; None for observed data"
    )
    warnings: tuple[str, ...] = ()

    @field_validator("x1", "x2", mode="before")
    @classmethod
    def _as_frozen_array(cls, value) -> np.ndarray:
        array = np.array(value, dtype=np.float64, copy=True)
        if array.ndim != 1:
            raise ValueError("paths must be one-dimensional")
        if not np.all(np.isfinite(array)):
            raise ValueError("paths must contain finite values only")
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _check_alignment(self) -> "PathPair":
        expected = self.grid.n + 1
        if self.x1.shape[0] != expected or self.x2.shape[0] != expected:
            raise ValueError(
                f"paths must hold n + 1 = {expected} samples, got "
                f"{self.x1.shape[0]} and {self.x2.shape[0]}"
            )
        if self.x0 is not None and not (self.x1[0] == self.x2[0] == self.x0):
            raise ValueError("both paths must start at x0")
        return self

    def path(self, index: int) -> np.ndarray:
        if index == 1:
            return self.x1
        if index == 2:
            return self.x2
        raise ValueError(f"path index must be 1 or 2, got {index}")
