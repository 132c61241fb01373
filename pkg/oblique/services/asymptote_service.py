import logging
from typing import Optional

import numpy as np

from oblique.core.errors import PreconditionError
from oblique.schemas.integration import Trajectory
from oblique.schemas.reports import (
    AsymptoteEstimate,
    Classification,
    ClassificationThresholds,
    Spread,
)
from oblique.services.integrator_service import IntegratorService
from oblique.utils.helpers import log_spaced
from oblique.utils.limits import tail_limit


logger = logging.getLogger(__name__)


class AsymptoteService:
    @staticmethod
    def estimate(
        traj: Trajectory,
        window: int = 16,
        thresholds: Optional[ClassificationThresholds] = None,
    ) -> AsymptoteEstimate:
        """Read x1, x2 and lim u off the last stretch [t_last/span, t_last].

        x1 comes from x' = v + u/t, which settles like o(1/t); the slower
        v route is kept as ``x1_from_v``. x2 = -lim u, cross-checked against
        the tail of t (v - x1).
        """
        thresholds = thresholds or ClassificationThresholds(window=window)
        if traj.termination.kind != "reached_horizon":
            raise PreconditionError(
                f"cannot estimate asymptote of a trajectory ending in {traj.termination.kind}"
            )
        t_last = traj.t_last
        lo = max(float(traj.t[0]), t_last / thresholds.window_span)
        times = log_spaced(lo, t_last, window)
        states = IntegratorService.resample(traj, times)
        ts = np.array([s.t for s in states])
        us = np.array([s.u for s in states])
        vs = np.array([s.v for s in states])

        u_lim, u_spread = tail_limit(list(zip(ts, us)), window)
        x1, x1_spread = tail_limit(list(zip(ts, vs + us / ts)), window)
        x1v, x1v_spread = tail_limit(list(zip(ts, vs)), window)
        x2_alt, x2_alt_spread = tail_limit(list(zip(ts, ts * (vs - x1))), window)
        x2 = -u_lim

        tol_u = thresholds.limit_rel_tol * (1.0 + abs(u_lim))
        tol_x1 = thresholds.limit_rel_tol * (1.0 + abs(x1))
        converged = u_spread <= tol_u and x1_spread <= tol_x1
        if not converged:
            logger.info("asymptote not settled: u spread %.3g, x1 spread %.3g", u_spread, x1_spread)
        return AsymptoteEstimate(
            x1=Spread(value=x1, spread=x1_spread),
            x2=Spread(value=x2, spread=max(u_spread, x2_alt_spread)),
            u_limit=Spread(value=u_lim, spread=u_spread),
            x1_from_v=Spread(value=x1v, spread=x1v_spread),
            consistency_residual=abs(x2 - x2_alt),
            window=window,
            t_window=(float(ts[0]), float(ts[-1])),
            converged=converged,
        )

    @staticmethod
    def u_growth(traj: Trajectory) -> float:
        """max|u| on the upper log-half of [t0, t_last] over that on the lower half."""
        t0, t_last = float(traj.t[0]), traj.t_last
        mid = np.sqrt(t0 * t_last)
        abs_u = np.abs(traj.u)
        lower = abs_u[traj.t <= mid]
        upper = abs_u[traj.t >= mid]
        m_lo = float(lower.max()) if lower.size else 0.0
        m_hi = float(upper.max()) if upper.size else 0.0
        if m_hi == 0.0:
            return 0.0
        if m_lo == 0.0:
            return np.inf
        return m_hi / m_lo

    @staticmethod
    def classify(
        traj: Trajectory,
        est: Optional[AsymptoteEstimate],
        thresholds: Optional[ClassificationThresholds] = None,
    ) -> Classification:
        thresholds = thresholds or ClassificationThresholds()
        term = traj.termination
        diagnostics = {
            "horizon": traj.t_last,
            "growth_factor": thresholds.growth_factor,
            "limit_rel_tol": thresholds.limit_rel_tol,
            "slope_floor": thresholds.slope_floor,
        }
        if term.is_blowup:
            return Classification(
                kind="Blowup",
                t_inf_estimate=term.t_inf_estimate,
                t_inf_uncertainty=term.t_inf_uncertainty,
                diagnostics=diagnostics,
                reason=f"terminated by {term.kind} at t={term.t_last!r}",
            )

        growth = AsymptoteService.u_growth(traj)
        diagnostics["u_growth"] = min(growth, 1e300)
        if growth >= thresholds.growth_factor:
            return Classification(
                kind="Unbounded",
                diagnostics=diagnostics,
                reason=f"max|u| grew by {growth:.3g} between the log-halves",
            )
        if term.kind != "reached_horizon":
            return Classification(kind="Undetermined", diagnostics=diagnostics, reason=f"run ended with {term.kind}")
        if est is None:
            return Classification(kind="Undetermined", diagnostics=diagnostics, reason="no asymptote estimate")

        diagnostics.update(
            {
                "x1_spread": est.x1.spread,
                "u_limit_spread": est.u_limit.spread,
                "consistency_residual": est.consistency_residual,
            }
        )
        if not est.converged:
            return Classification(kind="Undetermined", diagnostics=diagnostics, reason="limits did not settle")
        if abs(est.x1.value) > thresholds.slope_floor:
            return Classification(
                kind="AsymptoticallyLinear",
                x1=est.x1.value,
                x2=est.x2.value,
                diagnostics=diagnostics,
                reason="u settled and |x1| exceeds the slope floor",
            )
        return Classification(
            kind="Sublinear",
            diagnostics=diagnostics,
            reason="u settled and |x1| is within the slope floor",
        )
