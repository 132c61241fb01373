from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Annotated

from oblique.core.errors import ExpressionSyntaxError
from oblique.schemas.reports import ClassificationThresholds
from oblique.utils.expr import parse


def _check_expression(src: str, variables: List[str]) -> str:
    try:
        parse(src, variables)
    except ExpressionSyntaxError as e:
        raise ValueError(e.detail)
    return src


class Segment(BaseModel):
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    start: float = Field(..., alias="from")
    end: float = Field(..., alias="to")
    expr: str

    @field_validator("expr")
    def validate_expr(cls, value):
        return _check_expression(value, ["t"])

    @model_validator(mode="after")
    def validate_order(self):
        if not self.start < self.end:
            raise ValueError(f"segment [{self.start}, {self.end}] must have from < to.")
        return self


class Piecewise(BaseModel):
    """Ordered segments [from, to) -> expr in t, with ``default`` elsewhere."""

    model_config = ConfigDict(frozen=True)

    segments: List[Segment] = Field(..., min_length=1)
    default: str = "0"

    @field_validator("default")
    def validate_default(cls, value):
        return _check_expression(value, ["t"])

    @model_validator(mode="after")
    def validate_contiguous(self):
        for prev, nxt in zip(self.segments, self.segments[1:]):
            if nxt.start < prev.end:
                raise ValueError(
                    f"segments [{prev.start}, {prev.end}] and [{nxt.start}, {nxt.end}] overlap."
                )
            if nxt.start > prev.end:
                raise ValueError(
                    f"segments [{prev.start}, {prev.end}] and [{nxt.start}, {nxt.end}] leave a gap."
                )
        return self


Coefficient = Union[str, Piecewise]


class GeneralProblem(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["general"]
    f: str
    df_dv: Optional[str] = None
    df_dt: Optional[str] = None
    envelope_a: Optional[str] = None
    envelope_g: Optional[str] = None

    @field_validator("f", "df_dv", "df_dt")
    def validate_field_expr(cls, value):
        return value if value is None else _check_expression(value, ["t", "v"])

    @field_validator("envelope_a")
    def validate_a(cls, value):
        return value if value is None else _check_expression(value, ["t"])

    @field_validator("envelope_g")
    def validate_g(cls, value):
        return value if value is None else _check_expression(value, ["xi"])

    @model_validator(mode="after")
    def validate_envelope_pair(self):
        if (self.envelope_a is None) != (self.envelope_g is None):
            raise ValueError("envelope_a and envelope_g must be given together.")
        return self


class EmdenFowlerProblem(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["emden_fowler"]
    n: int = Field(..., ge=1)
    A: Coefficient
    dA_dt: Optional[Coefficient] = None

    @field_validator("A", "dA_dt")
    def validate_coefficient(cls, value):
        if isinstance(value, str):
            return _check_expression(value, ["t"])
        return value


ProblemConfig = Annotated[
    Union[GeneralProblem, EmdenFowlerProblem], Field(discriminator="kind")
]


class IvpConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    t0: float = Field(..., ge=1.0)
    x0: float
    xp0: float


class IntegrationSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    horizon: float
    rel_tol: float = Field(1e-9, gt=0.0)
    abs_tol: float = Field(1e-12, gt=0.0)
    blowup_threshold: float = Field(1e8, gt=0.0)
    h_min_factor: float = Field(1e-12, gt=0.0)
    max_steps: int = Field(10_000_000, ge=1)
    sample_stride: int = Field(1, ge=1)


class GridSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    t_max: Optional[float] = None
    t_count: int = Field(256, ge=16)
    v_max: float = Field(10.0, gt=0.0)
    v_count: int = Field(128, ge=16)
    t_spacing: Literal["linear", "logarithmic"] = "logarithmic"


class Range(BaseModel):
    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float
    count: int = Field(..., ge=1)

    @model_validator(mode="after")
    def validate_bounds(self):
        if self.hi < self.lo:
            raise ValueError("range needs lo <= hi.")
        return self


class SweepSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    x0: Range
    xp0: Range
    workers: Optional[int] = Field(None, ge=1)


CheckName = Literal["theorem1", "theorem2", "ef_negative", "caligo", "comparisons"]
MonitorName = Literal["v1", "v2", "bound_chain"]
EF_ONLY_CHECKS = ("ef_negative", "caligo", "comparisons")


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    description: str = ""
    problem: ProblemConfig
    ivp: IvpConfig
    integration: IntegrationSettings
    integrate: bool = True
    checks: List[CheckName] = []
    monitors: List[MonitorName] = []
    grid: GridSettings = GridSettings()
    breakpoints: List[float] = []
    classification: ClassificationThresholds = ClassificationThresholds()
    sweep: Optional[SweepSettings] = None

    @model_validator(mode="after")
    def validate_scenario(self):
        if self.integration.horizon <= self.ivp.t0:
            raise ValueError("integration.horizon must exceed ivp.t0.")
        if self.problem.kind == "general":
            wrong = [c for c in self.checks if c in EF_ONLY_CHECKS]
            if wrong:
                raise ValueError(f"checks {wrong} need an emden_fowler problem.")
        return self
