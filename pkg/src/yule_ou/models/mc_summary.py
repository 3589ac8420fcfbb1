import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class McSample(BaseModel):
    """Statistic values of a run, ordered by replication index."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    replications: np.ndarray
    values: np.ndarray
    skipped: int = Field(default=0, ge=0)

    @field_validator("replications", "values", mode="before")
    @classmethod
    def _as_frozen_array(cls, value) -> np.ndarray:
        array = np.array(value, copy=True)
        array.flags.writeable = False
        return array

    @model_validator(mode="after")
    def _check_alignment(self) -> "McSample":
        if self.replications.shape != self.values.shape:
            raise ValueError("one value per kept replication")
        return self

    def __len__(self) -> int:
        return int(self.values.shape[0])


class McSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    count: int = Field(ge=1)
    mean: float
    median: float
    stddev: float = Field(ge=0)
    min: float
    max: float

    @model_validator(mode="after")
    def _check_order(self) -> "McSummary":
        if not self.min <= self.median <= self.max:
            raise ValueError("median must lie between min and max")
        return self


class KsReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    distance: float = Field(ge=0, le=1)
    sample_size: int = Field(ge=1)
    location: float


class Ecdf(BaseModel):
    """Right-continuous step function: F(x) = fractions[i] on [x[i], x[i+1])."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: np.ndarray
    fractions: np.ndarray

    def __call__(self, value: float) -> float:
        index = int(np.searchsorted(self.x, value, side="right"))
        return 0.0 if index == 0 else float(self.fractions[index - 1])


class Histogram(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())
