from pydantic import BaseModel, ConfigDict, Field


class UvState(BaseModel):
    """State in the working coordinates u = t x' - x, v = x / t."""

    model_config = ConfigDict(frozen=True)

    t: float = Field(..., ge=1.0)
    u: float
    v: float


class XState(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float = Field(..., ge=1.0)
    x: float
    xp: float
