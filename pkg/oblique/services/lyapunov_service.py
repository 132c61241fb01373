import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from oblique.core.config import settings
from oblique.core.errors import ObliqueError, PreconditionError
from oblique.schemas.integration import Trajectory
from oblique.schemas.problem import IvpSpec, Nonlinearity
from oblique.schemas.reports import (
    BoundChainReport,
    BoundChainSample,
    LyapunovSample,
    MonotonicityReport,
    Violation,
)
from oblique.schemas.states import UvState
from oblique.utils.helpers import log_decimate
from oblique.utils.quadrature import integrate_finite, integrate_tail


logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps
SLACK_FACTOR = 10.0
# the partials only scale the slack, so they are integrated loosely
PARTIAL_REL_TOL = 1e-4
WINTNER_REL_SLACK = 1e-6

# (value sample, |dV/du|, |dV/dv|)
Evaluated = Tuple[LyapunovSample, float, float]


def _tol(quad_tol: Optional[float]) -> float:
    return settings.QUAD_REL_TOL if quad_tol is None else quad_tol


class LyapunovService:
    @staticmethod
    def v1(nl: Nonlinearity, t0: float, s: UvState, quad_tol: Optional[float] = None) -> LyapunovSample:
        """V = u^2/2 + u * int_{t0}^{t} r f(r, v) dr, with v frozen at s.v."""
        return LyapunovService._v1(nl, t0, s, quad_tol)[0]

    @staticmethod
    def _v1(nl: Nonlinearity, t0: float, s: UvState, quad_tol: Optional[float], partials: bool = False) -> Evaluated:
        if s.t < t0:
            raise PreconditionError(f"v1 needs t >= t0, got t={s.t!r} < {t0!r}")
        v, f = s.v, nl.f
        q = integrate_finite(lambda r: r * f(r, v), t0, s.t, _tol(quad_tol), settings.QUAD_ABS_TOL)
        sample = LyapunovSample(
            t=s.t,
            value=0.5 * s.u**2 + s.u * q.value,
            quad_error=abs(s.u) * q.abs_error_estimate,
        )
        if not partials:
            return sample, 0.0, 0.0
        dq_dv = integrate_finite(lambda r: r * nl.dfdv(r, v), t0, s.t, PARTIAL_REL_TOL, settings.QUAD_ABS_TOL)
        return sample, abs(s.u + q.value), abs(s.u * dq_dv.value)

    @staticmethod
    def v2(nl: Nonlinearity, s: UvState, quad_tol: Optional[float] = None) -> LyapunovSample:
        """V = u^2/2 + t^3 * int_0^v f(t, r) dr (signed for v < 0)."""
        return LyapunovService._v2(nl, s, quad_tol)[0]

    @staticmethod
    def _v2(nl: Nonlinearity, s: UvState, quad_tol: Optional[float], partials: bool = False) -> Evaluated:
        t, f = s.t, nl.f
        t3 = t**3
        q = integrate_finite(lambda r: f(t, r), 0.0, s.v, _tol(quad_tol), settings.QUAD_ABS_TOL)
        sample = LyapunovSample(
            t=t,
            value=0.5 * s.u**2 + t3 * q.value,
            quad_error=t3 * q.abs_error_estimate,
        )
        return sample, abs(s.u), (abs(t3 * f(t, s.v)) if partials else 0.0)

    @staticmethod
    def _monitor(
        name: str,
        traj: Trajectory,
        evaluate: Callable[[UvState], Evaluated],
    ) -> MonotonicityReport:
        idx = log_decimate(traj.t, settings.MONITOR_MAX_POINTS)
        err_u = np.concatenate([[0.0], np.cumsum(traj.err_u[1:])])
        err_v = np.concatenate([[0.0], np.cumsum(traj.err_v[1:])])

        evaluated = [evaluate(traj.state(int(i))) for i in idx]
        values = [e[0].value for e in evaluated]
        violations: List[Violation] = []
        max_increase = -math.inf
        cumulative = evaluated[0][0].quad_error
        drift = 0.0
        conserved = True
        for k in range(len(idx) - 1):
            (a, du_a, dv_a), (b, du_b, dv_b) = evaluated[k], evaluated[k + 1]
            i, j = idx[k], idx[k + 1]
            step_err_u = err_u[j] - err_u[i]
            step_err_v = err_v[j] - err_v[i]
            propagated = max(du_a, du_b) * step_err_u + max(dv_a, dv_b) * step_err_v
            slack = (
                a.quad_error
                + b.quad_error
                + SLACK_FACTOR * propagated
                + 4.0 * EPS * (abs(a.value) + abs(b.value))
            )
            increase = b.value - a.value
            max_increase = max(max_increase, increase)
            if increase > slack:
                violations.append(
                    Violation(t_prev=a.t, t_next=b.t, increase=increase, allowed_slack=slack)
                )
            cumulative += SLACK_FACTOR * propagated + 4.0 * EPS * abs(b.value)
            deviation = abs(b.value - values[0])
            drift = max(drift, deviation)
            if deviation > cumulative + b.quad_error:
                conserved = False

        if len(idx) == 1:
            max_increase = 0.0
        report = MonotonicityReport(
            function=name,
            samples=len(idx),
            violations=violations,
            max_increase=max_increase,
            drift=drift,
            total_slack=cumulative,
            passed=not violations,
        )
        logger.info(
            "%s monitor: %d samples, %d violation(s), max increase %.3g, drift %.3g (conserved within slack: %s)",
            name,
            len(idx),
            len(violations),
            max_increase,
            drift,
            conserved,
        )
        return report

    @staticmethod
    def monitor_v1(nl: Nonlinearity, ivp: IvpSpec, traj: Trajectory, quad_tol: Optional[float] = None) -> MonotonicityReport:
        try:
            return LyapunovService._monitor(
                "V1", traj, lambda s: LyapunovService._v1(nl, ivp.t0, s, quad_tol, partials=True)
            )
        except ObliqueError as e:
            raise e
        except Exception as e:
            raise ObliqueError(f"Failed to monitor V1: {str(e)}")

    @staticmethod
    def monitor_v2(nl: Nonlinearity, traj: Trajectory, quad_tol: Optional[float] = None) -> MonotonicityReport:
        try:
            report = LyapunovService._monitor(
                "V2", traj, lambda s: LyapunovService._v2(nl, s, quad_tol, partials=True)
            )
        except ObliqueError as e:
            raise e
        except Exception as e:
            raise ObliqueError(f"Failed to monitor V2: {str(e)}")

        # When vf >= 0 the integral term is nonnegative, so u^2/2 <= V2(t) <= V2(t0).
        start = LyapunovService.v2(nl, traj.state(0), quad_tol)
        if start.value < 0.0:
            return report
        bound = math.sqrt(2.0 * (start.value + report.total_slack))
        within = bool(np.all(np.abs(traj.u) <= bound))
        return report.model_copy(update={"u_bound": math.sqrt(2.0 * start.value), "u_bound_passed": within})

    @staticmethod
    def wintner_bound(ivp: IvpSpec, traj: Trajectory) -> float:
        """Largest ratio of |x| + |x'| to the a-priori bound built from max |u|.

        On [t0, T]: |x| + |x'| <= (1 + T)|v(t0)| + (T + 2) max|u| / t0.
        """
        running_max = np.maximum.accumulate(np.abs(traj.u))
        bound = (1.0 + traj.t) * abs(ivp.v0) + (traj.t + 2.0) * running_max / ivp.t0
        magnitude = np.abs(traj.x) + np.abs(traj.xp)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(bound > 0.0, magnitude / bound, np.where(magnitude > 0.0, np.inf, 0.0))
        return float(np.max(ratio))

    @staticmethod
    def bound_chain(nl: Nonlinearity, ivp: IvpSpec, traj: Trajectory, quad_tol: Optional[float] = None) -> BoundChainReport:
        """Check |u| < 4(y + c) and y <= K g(z) along the trajectory."""
        if not nl.has_envelope:
            raise PreconditionError("bound_chain needs an envelope pair (a, g)")
        a, g = nl.envelope_a, nl.envelope_g
        rel_tol = _tol(quad_tol)
        c = ivp.c

        tail = integrate_tail(lambda s: s * a(s), ivp.t0, rel_tol)
        K = tail.value if tail.convergent else None

        ts, us = traj.t, traj.u
        z_all = 1.0 + abs(ivp.v0) + cumulative_trapezoid(np.abs(us) / ts**2, ts, initial=0.0)
        idx = log_decimate(ts, settings.MONITOR_MAX_POINTS)

        samples: List[BoundChainSample] = []
        integral, prev = 0.0, ivp.t0
        max_ratio = 0.0
        passed = y_ok = True
        for i in idx:
            t = float(ts[i])
            integral += integrate_finite(lambda s: s * a(s), prev, t, rel_tol, settings.QUAD_ABS_TOL).value
            prev = t
            y = integral * g(abs(float(traj.v[i])))
            z = float(z_all[i])
            bound = 4.0 * (y + c)
            abs_u = abs(float(us[i]))
            samples.append(BoundChainSample(t=t, abs_u=abs_u, y=y, z=z, bound_4yc=bound))
            max_ratio = max(max_ratio, abs_u / bound if bound > 0.0 else math.inf)
            passed = passed and abs_u < bound
            if K is None or y > K * g(z) * (1.0 + 1e-9) + settings.QUAD_ABS_TOL:
                y_ok = False

        wintner = LyapunovService.wintner_bound(ivp, traj)
        logger.info("bound chain: max |u|/(4(y+c)) = %.4g, passed=%s", max_ratio, passed)
        return BoundChainReport(
            samples=samples,
            K=K,
            c=c,
            max_ratio=max_ratio,
            passed=passed,
            y_bound_passed=y_ok,
            wintner_ratio=wintner,
            wintner_passed=wintner <= 1.0 + WINTNER_REL_SLACK,
        )
