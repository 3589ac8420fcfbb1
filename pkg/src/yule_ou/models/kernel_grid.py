from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class KernelDomain(str, Enum):
    SYMMETRIC_TT = "symmetric_tt"  # [-T, T]
    POSITIVE_T = "positive_t"  # [0, T]


class KernelGrid(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nodes: np.ndarray
    weights: np.ndarray
    domain: KernelDomain
    horizon: float = Field(gt=0)

    @field_validator("nodes", "weights", mode="before")
    @classmethod
    def _as_frozen_array(cls, value) -> np.ndarray:
        array = np.array(value, dtype=np.float64, copy=True)
        array.flags.writeable = False
        return array

    @property
    def lower(self) -> float:
        return -self.horizon if self.domain is KernelDomain.SYMMETRIC_TT else 0.0

    @property
    def length(self) -> float:
        return self.horizon - self.lower

    @property
    def size(self) -> int:
        return int(self.nodes.shape[0])

    @model_validator(mode="after")
    def _check_quadrature(self) -> "KernelGrid":
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and weights must be aligned vectors")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if self.nodes[0] < self.lower or self.nodes[-1] > self.horizon:
            raise ValueError("nodes must lie inside the domain")
        if abs(self.weights.sum() - self.length) > 1e-10 * self.length:
            raise ValueError("weights must sum to the domain length")
        return self


class ChaosSpectrum(BaseModel):
    """Signed eigenvalues of a second-chaos kernel, largest magnitude first."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lambdas: np.ndarray
    trace: float
    hs_norm_sq: float = Field(ge=0)
    third_sum: float

    @field_validator("lambdas", mode="before")
    @classmethod
    def _as_frozen_array(cls, value) -> np.ndarray:
        array = np.array(value, dtype=np.float64, copy=True).reshape(-1)
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _check_order(self) -> "ChaosSpectrum":
        if np.any(np.diff(np.abs(self.lambdas)) > 0):
            raise ValueError("eigenvalues must be sorted by decreasing magnitude")
        return self

    @classmethod
    def from_lambdas(cls, lambdas: np.ndarray) -> "ChaosSpectrum":
        values = np.asarray(lambdas, dtype=np.float64).reshape(-1)
        values = values[np.argsort(-np.abs(values), kind="stable")]
        return cls(
            lambdas=values,
            trace=float(values.sum()),
            hs_norm_sq=float(np.dot(values, values)),
            third_sum=float(np.sum(values**3)),
        )

    @property
    def variance(self) -> float:
        # Var(sum lambda_k (Z_k^2 - 1)) = 2 sum lambda_k^2
        return 2.0 * self.hs_norm_sq

    @property
    def third_cumulant(self) -> float:
        return 8.0 * self.third_sum
