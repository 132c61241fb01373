from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from oblique.schemas.integration import Termination
from oblique.schemas.reports import (
    AsymptoteEstimate,
    BoundChainReport,
    Classification,
    ConditionVerdict,
    MonotonicityReport,
)


class TrajectorySummary(BaseModel):
    termination: Termination
    samples: int
    accepted_steps: int
    rejected_steps: int
    evaluations: int
    t_first: float
    t_last: float
    final: Dict[str, float]
    max_abs_u: float
    sign_changes: int


class RunReport(BaseModel):
    """Result of one scenario; everything except ``timings`` is reproducible."""

    scenario: Dict[str, Any]
    derived: Dict[str, float]
    verdicts: Dict[str, List[ConditionVerdict]] = {}
    trajectory: Optional[TrajectorySummary] = None
    lyapunov: Dict[str, MonotonicityReport] = {}
    bound_chain: Optional[BoundChainReport] = None
    estimate: Optional[AsymptoteEstimate] = None
    classification: Optional[Classification] = None
    errors: List[str] = []
    timings: Dict[str, float] = Field(default_factory=dict)

    def report_json(self) -> str:
        """Full report; ``timings`` is the last section and the only one that varies between runs."""
        return self.model_dump_json(indent=2)

    def reproducible_json(self) -> str:
        return self.model_dump_json(exclude={"timings"}, indent=2)


class SweepPoint(BaseModel):
    x0: float
    xp0: float
    classification: Optional[Classification] = None
    threshold_margin: Optional[float] = None
    error: Optional[str] = None


class SweepReport(BaseModel):
    scenario: str
    points: List[SweepPoint]
    counts: Dict[str, int]


class AcceptanceCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""
    values: Dict[str, Optional[float]] = {}


class SuiteReport(BaseModel):
    passed: bool
    checks: List[AcceptanceCheck]
    timings: Dict[str, float] = Field(default_factory=dict)

    @property
    def failures(self) -> List[str]:
        return [f"{c.name}: {c.detail}" for c in self.checks if not c.passed]

    def report_json(self) -> str:
        return self.model_dump_json(indent=2)

    def reproducible_json(self) -> str:
        return self.model_dump_json(exclude={"timings"}, indent=2)
