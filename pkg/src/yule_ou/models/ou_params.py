from pydantic import BaseModel, ConfigDict, Field


class OuParams(BaseModel):
    """Drift and initial condition shared by both paths of a pair."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    theta: float = Field(gt=0, description="Mean-reversion rate, 1/time")
    x0: float = Field(default=0.0, description="Common initial value X_i(0)")

    @classmethod
    def degenerate_brownian(cls) -> "OuParams":
        """theta = 0 diagnostic: the Euler recursion becomes a random walk."""
        return cls.model_construct(theta=0.0, x0=0.0)
