from typing import Callable, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from oblique.utils.differences import central_diff


ScalarFn = Callable[[float], float]
FieldFn = Callable[[float, float], float]


class Nonlinearity(BaseModel):
    """The right-hand side f(t, v) of x'' + f(t, x/t) = 0, with optional extras."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    f: FieldFn
    df_dv: Optional[FieldFn] = None
    df_dt: Optional[FieldFn] = None
    envelope_a: Optional[ScalarFn] = None
    envelope_g: Optional[ScalarFn] = None
    label: str = ""

    @property
    def has_envelope(self) -> bool:
        return self.envelope_a is not None and self.envelope_g is not None

    def dfdv(self, t: float, v: float) -> float:
        if self.df_dv is not None:
            return self.df_dv(t, v)
        return central_diff(lambda s: self.f(t, s), v, 1.0)

    def dfdt(self, t: float, v: float) -> float:
        if self.df_dt is not None:
            return self.df_dt(t, v)
        return central_diff(lambda s: self.f(s, v), t, 1.0)


class EmdenFowlerCoeff(BaseModel):
    """x'' + A(t) x^(2n-1) = 0."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(..., ge=1)
    A: ScalarFn
    dA_dt: Optional[ScalarFn] = None
    label: str = ""

    @property
    def power(self) -> int:
        return 2 * self.n - 1

    def dAdt(self, t: float) -> float:
        if self.dA_dt is not None:
            return self.dA_dt(t)
        return central_diff(self.A, t, 1.0)


class IvpSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    t0: float = Field(..., ge=1.0)
    x0: float
    xp0: float

    @field_validator("x0", "xp0")
    def validate_finite(cls, value):
        if value != value or abs(value) == float("inf"):
            raise ValueError("Initial data must be finite.")
        return value

    @property
    def u0(self) -> float:
        return self.t0 * self.xp0 - self.x0

    @property
    def v0(self) -> float:
        return self.x0 / self.t0

    @property
    def c(self) -> float:
        return 1.0 + 0.5 * self.u0**2
