from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


class QuadResult(Frozen):
    value: float
    abs_error_estimate: float = Field(..., ge=0.0)
    converged: bool
    evaluations: int = 0


class TailVerdict(Frozen):
    kind: Literal["convergent", "divergent", "inconclusive"]
    value: Optional[float] = None
    abs_error: float = 0.0
    extrapolated: bool = False
    horizons: List[float] = []
    evidence: List[float] = []

    @property
    def convergent(self) -> bool:
        return self.kind == "convergent"


class LyapunovSample(Frozen):
    t: float
    value: float
    quad_error: float = Field(..., ge=0.0)

    @field_validator("quad_error")
    def validate_quad_error(cls, value):
        if value != value or value == float("inf"):
            raise ValueError("quad_error must be finite.")
        return value


class Violation(Frozen):
    t_prev: float
    t_next: float
    increase: float
    allowed_slack: float


class MonotonicityReport(Frozen):
    function: Literal["V1", "V2"]
    samples: int
    violations: List[Violation] = []
    max_increase: float
    drift: float
    total_slack: float
    passed: bool
    u_bound: Optional[float] = None
    u_bound_passed: Optional[bool] = None


class BoundChainSample(Frozen):
    t: float
    abs_u: float
    y: float
    z: float
    bound_4yc: float


class BoundChainReport(Frozen):
    samples: List[BoundChainSample]
    K: Optional[float]
    c: float
    max_ratio: float
    passed: bool
    y_bound_passed: bool
    wintner_ratio: float
    wintner_passed: bool


class SamplingGrid(Frozen):
    t_range: Tuple[float, float]
    t_count: int = Field(256, ge=16)
    v_max: float = Field(10.0, gt=0.0)
    v_count: int = Field(128, ge=16)
    t_spacing: Literal["linear", "logarithmic"] = "logarithmic"

    @field_validator("t_range")
    def validate_t_range(cls, value):
        lo, hi = value
        if lo < 1.0 or hi <= lo:
            raise ValueError("t_range must satisfy 1 <= t_min < t_max.")
        return value


class Witness(Frozen):
    t: Optional[float] = None
    v: Optional[float] = None
    values: Dict[str, float] = {}


class ConditionVerdict(Frozen):
    name: str
    status: Literal["holds", "fails", "inconclusive"]
    witness: Optional[Witness] = None
    computed: Dict[str, float] = {}
    grid: Optional[SamplingGrid] = None
    note: Optional[str] = None


class Spread(Frozen):
    value: float
    spread: float


class AsymptoteEstimate(Frozen):
    x1: Spread
    x2: Spread
    u_limit: Spread
    x1_from_v: Spread
    consistency_residual: float
    window: int
    t_window: Tuple[float, float]
    converged: bool


class Classification(Frozen):
    kind: Literal[
        "Blowup", "Sublinear", "AsymptoticallyLinear", "Unbounded", "Undetermined"
    ]
    x1: Optional[float] = None
    x2: Optional[float] = None
    t_inf_estimate: Optional[float] = None
    t_inf_uncertainty: Optional[float] = None
    diagnostics: Dict[str, float] = {}
    reason: str = ""


class ClassificationThresholds(Frozen):
    growth_factor: float = Field(10.0, gt=1.0)
    limit_rel_tol: float = Field(1e-6, gt=0.0)
    slope_floor: float = Field(1e-7, ge=0.0)
    window: int = Field(16, ge=2)
    window_span: float = Field(2.0, gt=1.0)
