from dataclasses import dataclass, field
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from oblique.schemas.problem import IvpSpec, Nonlinearity
from oblique.schemas.states import UvState


class IntegrationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(1e-9, gt=0.0)
    abs_tol: float = Field(1e-12, gt=0.0)
    t_end: float
    blowup_threshold: float = Field(1e8, gt=0.0)
    h_min_factor: float = Field(1e-12, gt=0.0)
    max_steps: int = Field(10_000_000, ge=1)
    sample_stride: int = Field(1, ge=1)
    breakpoints: List[float] = []

    @field_validator("breakpoints")
    def validate_breakpoints(cls, value):
        return sorted(set(value))


TerminationKind = Literal[
    "reached_horizon",
    "blowup",
    "step_collapse",
    "step_budget_exhausted",
    "evaluation_error",
]


class Termination(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: TerminationKind
    t_last: float
    t_inf_estimate: Optional[float] = None
    t_inf_uncertainty: Optional[float] = None
    message: Optional[str] = None

    @property
    def is_blowup(self) -> bool:
        return self.kind in ("blowup", "step_collapse")


class Event(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["blowup", "horizon"]
    t: float
    state: UvState
    magnitude: float
    step_collapse: bool = False


@dataclass(frozen=True)
class DenseOutput:
    """Per-step quartic continuous extension y(t0 + theta*h) = y0 + q @ theta^(1..4)."""

    t_start: np.ndarray
    h: np.ndarray
    y_start: np.ndarray
    q: np.ndarray

    def __call__(self, t: float) -> np.ndarray:
        i = int(np.searchsorted(self.t_start, t, side="right")) - 1
        i = min(max(i, 0), len(self.t_start) - 1)
        theta = (t - self.t_start[i]) / self.h[i]
        powers = np.array([theta, theta**2, theta**3, theta**4])
        return self.y_start[i] + self.q[i] @ powers


@dataclass(frozen=True)
class Trajectory:
    """Accepted (t, u, v) samples of one run plus how it ended.

    ``err_u``/``err_v`` hold the summed absolute local error estimates of the
    accepted steps since the previous stored sample.
    """

    nl: Nonlinearity
    ivp: IvpSpec
    cfg: IntegrationConfig
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    err_u: np.ndarray
    err_v: np.ndarray
    h: np.ndarray
    termination: Termination
    dense: DenseOutput
    events: List[Event] = field(default_factory=list)
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0

    @property
    def t_last(self) -> float:
        return float(self.t[-1])

    @property
    def x(self) -> np.ndarray:
        return self.t * self.v

    @property
    def xp(self) -> np.ndarray:
        return self.v + self.u / self.t

    def state(self, i: int) -> UvState:
        return UvState(t=float(self.t[i]), u=float(self.u[i]), v=float(self.v[i]))

    def __len__(self) -> int:
        return len(self.t)
