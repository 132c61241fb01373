import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from oblique.core.errors import EvaluationError, PreconditionError
from oblique.schemas.integration import (
    DenseOutput,
    Event,
    IntegrationConfig,
    Termination,
    Trajectory,
)
from oblique.schemas.problem import IvpSpec, Nonlinearity
from oblique.schemas.states import UvState
from oblique.services.transform_service import Rhs, TransformService


logger = logging.getLogger(__name__)

# Dormand-Prince 5(4) tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B_HAT = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
E = B - B_HAT

# Continuous extension: y(t + theta h) = y + h * K^T @ P @ (theta, ..., theta^4)
P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

SAFETY = 0.9
ALPHA = 0.17
BETA = 0.04
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERR_OLD_FLOOR = 1e-4
T_INF_WINDOW = 5

Magnitude = Callable[[float, np.ndarray], float]


@dataclass
class Solution:
    """Raw output of one stepper run."""

    t: List[float]
    y: List[np.ndarray]
    err: List[np.ndarray]
    h: List[float]
    termination: Termination
    dense_t: List[float] = field(default_factory=list)
    dense_h: List[float] = field(default_factory=list)
    dense_y: List[np.ndarray] = field(default_factory=list)
    dense_q: List[np.ndarray] = field(default_factory=list)
    blowup_magnitude: Optional[float] = None
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0

    @property
    def y_last(self) -> np.ndarray:
        return self.y[-1]


def _error_norm(err: np.ndarray, y_old: np.ndarray, y_new: np.ndarray, cfg: IntegrationConfig) -> float:
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def _rms(x: np.ndarray, scale: np.ndarray) -> float:
    return float(np.sqrt(np.mean((x / scale) ** 2)))


def _initial_step(rhs: Rhs, t0: float, y0: np.ndarray, f0: np.ndarray, direction: float, cfg: IntegrationConfig) -> float:
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y0)
    d0, d1 = _rms(y0, scale), _rms(f0, scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = rhs(t0 + direction * h0, y1)
    d2 = _rms(f1 - f0, scale) / h0 if np.all(np.isfinite(f1)) else math.inf
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    elif math.isinf(d2):
        h1 = h0 * 1e-3
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1)


def _t_inf(steps: Sequence[float], t_last: float) -> tuple:
    """Extrapolate the singular time from geometrically shrinking steps."""
    recent = [abs(h) for h in steps[-(T_INF_WINDOW + 1) :] if h != 0.0]
    h_last = recent[-1] if recent else 0.0
    if len(recent) < 2:
        return t_last, 10.0 * h_last
    ratios = [b / a for a, b in zip(recent, recent[1:])]
    rho = math.exp(sum(math.log(r) for r in ratios) / len(ratios))
    remaining = h_last * rho / (1.0 - rho) if rho < 1.0 else 0.0
    return t_last + remaining, 10.0 * h_last


class IntegratorService:
    @staticmethod
    def advance_system(
        rhs: Rhs,
        t0: float,
        y0: Sequence[float],
        t_target: float,
        cfg: IntegrationConfig,
        magnitude: Optional[Magnitude] = None,
    ) -> Solution:
        """Integrate y' = rhs(t, y) from t0 towards t_target (either direction).

        Stops early when ``magnitude(t, y)`` exceeds ``cfg.blowup_threshold``,
        when the proposed step collapses below ``h_min_factor * |t|`` or when
        ``max_steps`` attempts are used up.
        """
        direction = 1.0 if t_target >= t0 else -1.0
        stops = [b for b in cfg.breakpoints if (b - t0) * direction > 0 and (t_target - b) * direction > 0]
        stops = sorted(stops, key=lambda b: direction * b) + [t_target]

        t = float(t0)
        y = np.asarray(y0, dtype=float)
        sol = Solution(
            t=[t],
            y=[y.copy()],
            err=[np.zeros_like(y)],
            h=[0.0],
            termination=Termination(kind="reached_horizon", t_last=t),
        )
        if t == t_target:
            return sol

        def finish(kind: str, message: Optional[str] = None) -> Solution:
            t_inf = unc = None
            if kind in ("blowup", "step_collapse"):
                t_inf, unc = _t_inf(accepted_steps, t)
            sol.termination = Termination(
                kind=kind,
                t_last=t,
                t_inf_estimate=t_inf,
                t_inf_uncertainty=unc,
                message=message,
            )
            # the final state is always kept, whatever the stride
            if sol.t[-1] != t:
                sol.t.append(t)
                sol.y.append(y.copy())
                sol.err.append(err_acc.copy())
                sol.h.append(accepted_steps[-1] if accepted_steps else 0.0)
            return sol

        accepted_steps: List[float] = []
        err_acc = np.zeros_like(y)
        since_sample = 0
        try:
            k1 = rhs(t, y)
            sol.evaluations += 1
            h = _initial_step(rhs, t, y, k1, direction, cfg)
            sol.evaluations += 1
        except EvaluationError as e:
            return finish("evaluation_error", e.detail)

        err_old = ERR_OLD_FLOOR
        rejected_last = False
        stop_index = 0
        attempts = 0
        K = np.empty((7, y.size))

        while True:
            if attempts >= cfg.max_steps:
                logger.warning("step budget of %d exhausted at t=%r", cfg.max_steps, t)
                return finish("step_budget_exhausted")
            attempts += 1

            stop = stops[stop_index]
            remaining = (stop - t) * direction
            landing = 1.01 * h >= remaining
            step = remaining if landing else h
            hs = direction * step

            try:
                K[0] = k1
                for i in range(1, 7):
                    K[i] = rhs(t + C[i] * hs, y + hs * (A[i] @ K[:i]))
                sol.evaluations += 6
            except EvaluationError as e:
                return finish("evaluation_error", e.detail)

            y_new = y + hs * (B @ K)
            local_err = hs * (E @ K)
            if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(local_err))):
                err_norm = math.inf
            else:
                err_norm = _error_norm(local_err, y, y_new, cfg)

            if err_norm <= 1.0:
                if err_norm == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = SAFETY * err_norm**-ALPHA * err_old**BETA
                    factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
                if rejected_last:
                    factor = min(factor, 1.0)
                err_old = max(err_norm, ERR_OLD_FLOOR)
                rejected_last = False

                sol.dense_t.append(t)
                sol.dense_h.append(hs)
                sol.dense_y.append(y.copy())
                sol.dense_q.append(hs * (K.T @ P))

                t = stop if landing else t + hs
                y = y_new
                k1 = K[6].copy()
                accepted_steps.append(hs)
                sol.accepted += 1
                err_acc = err_acc + np.abs(local_err)
                since_sample += 1
                if since_sample >= cfg.sample_stride:
                    sol.t.append(t)
                    sol.y.append(y.copy())
                    sol.err.append(err_acc.copy())
                    sol.h.append(hs)
                    err_acc = np.zeros_like(y)
                    since_sample = 0

                if magnitude is not None:
                    m = magnitude(t, y)
                    if m > cfg.blowup_threshold:
                        sol.blowup_magnitude = m
                        logger.info("blowup threshold crossed at t=%r (|x|+|x'|=%.3g)", t, m)
                        return finish("blowup")

                if landing:
                    if stop_index == len(stops) - 1:
                        return finish("reached_horizon")
                    stop_index += 1
                    h = max(step * factor, h)
                else:
                    h = step * factor
            else:
                sol.rejected += 1
                rejected_last = True
                factor = MIN_FACTOR if math.isinf(err_norm) else max(MIN_FACTOR, SAFETY * err_norm**-0.2)
                h = step * factor
                logger.debug("rejected step at t=%r, err=%.3g, new h=%.3g", t, err_norm, h)

            if h < cfg.h_min_factor * abs(t):
                logger.info("step size collapsed at t=%r (h=%.3g)", t, h)
                return finish("step_collapse")

    @staticmethod
    def integrate(nl: Nonlinearity, ivp: IvpSpec, cfg: IntegrationConfig) -> Trajectory:
        if cfg.t_end <= ivp.t0:
            raise PreconditionError(f"t_end={cfg.t_end!r} must exceed t0={ivp.t0!r}")

        def magnitude(t: float, y: np.ndarray) -> float:
            u, v = y
            return abs(t * v) + abs(v + u / t)

        sol = IntegratorService.advance_system(
            TransformService.uv_system(nl),
            ivp.t0,
            (ivp.u0, ivp.v0),
            cfg.t_end,
            cfg,
            magnitude,
        )
        return IntegratorService._to_trajectory(nl, ivp, cfg, sol)

    @staticmethod
    def _to_trajectory(nl: Nonlinearity, ivp: IvpSpec, cfg: IntegrationConfig, sol: Solution) -> Trajectory:
        ys = np.array(sol.y)
        errs = np.array(sol.err)
        ts = np.array(sol.t)
        term = sol.termination
        last = UvState(t=float(ts[-1]), u=float(ys[-1, 0]), v=float(ys[-1, 1]))
        events: List[Event] = []
        if term.kind == "reached_horizon":
            events.append(Event(kind="horizon", t=last.t, state=last, magnitude=abs(last.t * last.v) + abs(last.v + last.u / last.t)))
        elif term.is_blowup:
            m = sol.blowup_magnitude
            if m is None:
                m = abs(last.t * last.v) + abs(last.v + last.u / last.t)
            events.append(
                Event(kind="blowup", t=last.t, state=last, magnitude=m, step_collapse=term.kind == "step_collapse")
            )
        if sol.dense_t:
            dense = DenseOutput(
                t_start=np.array(sol.dense_t),
                h=np.array(sol.dense_h),
                y_start=np.array(sol.dense_y),
                q=np.array(sol.dense_q),
            )
        else:
            dense = DenseOutput(
                t_start=ts[:1], h=np.ones(1), y_start=ys[:1], q=np.zeros((1, ys.shape[1], 4))
            )
        return Trajectory(
            nl=nl,
            ivp=ivp,
            cfg=cfg,
            t=ts,
            u=ys[:, 0],
            v=ys[:, 1],
            err_u=errs[:, 0],
            err_v=errs[:, 1],
            h=np.array(sol.h),
            termination=term,
            dense=dense,
            events=events,
            accepted=sol.accepted,
            rejected=sol.rejected,
            evaluations=sol.evaluations,
        )

    @staticmethod
    def advance(nl: Nonlinearity, state: UvState, t_target: float, cfg: IntegrationConfig) -> UvState:
        """Carry a (u, v) state to ``t_target`` in either direction."""
        sol = IntegratorService.advance_system(
            TransformService.uv_system(nl), state.t, (state.u, state.v), t_target, cfg
        )
        if sol.termination.kind != "reached_horizon":
            raise EvaluationError(
                f"could not reach t={t_target!r}: {sol.termination.kind} at t={sol.termination.t_last!r}"
            )
        u, v = sol.y_last
        return UvState(t=t_target, u=float(u), v=float(v))

    @staticmethod
    def resample(traj: Trajectory, times: Sequence[float]) -> List[UvState]:
        """Dense-output states at ``times`` (each within [t0, t_last])."""
        t0, t_last = float(traj.t[0]), traj.t_last
        out: List[UvState] = []
        for t in times:
            t = float(t)
            if t < t0 or t > t_last:
                raise PreconditionError(f"resample time {t!r} outside [{t0!r}, {t_last!r}]")
            if t == t0:
                out.append(traj.state(0))
            elif t == t_last:
                out.append(traj.state(len(traj) - 1))
            else:
                u, v = traj.dense(t)
                out.append(UvState(t=t, u=float(u), v=float(v)))
        return out
