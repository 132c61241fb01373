"""Adaptive Gauss-Kronrod quadrature on finite intervals and doubling tails."""

import heapq
import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from oblique.core.config import settings
from oblique.core.errors import EvaluationError
from oblique.schemas.reports import QuadResult, TailVerdict


logger = logging.getLogger(__name__)

Integrand = Callable[[float], float]

# Kronrod 15-point nodes on [0, 1); the Gauss 7-point rule uses the odd ones.
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)
_EPS = np.finfo(float).eps

GROWTH_FACTOR = 1.1
DIVERGENCE_RUN = 5
RATIO_STABILITY = 1e-3


def _sample(h: Integrand, s: float) -> float:
    value = h(s)
    if not math.isfinite(value):
        raise EvaluationError(f"integrand is not finite at s={s!r}")
    return value


def gauss_kronrod(h: Integrand, lo: float, hi: float) -> Tuple[float, float]:
    """One G7/K15 panel: (integral, error estimate)."""
    centr = 0.5 * (lo + hi)
    hlgth = 0.5 * (hi - lo)
    offsets = hlgth * _XGK[:7]
    fc = _sample(h, centr)
    f1 = np.array([_sample(h, centr - d) for d in offsets])
    f2 = np.array([_sample(h, centr + d) for d in offsets])
    fsum = f1 + f2

    resk = _WGK[7] * fc + float(_WGK[:7] @ fsum)
    resg = _WG[3] * fc + float(_WG[:3] @ fsum[1::2])
    resabs = _WGK[7] * abs(fc) + float(_WGK[:7] @ (np.abs(f1) + np.abs(f2)))
    reskh = 0.5 * resk
    resasc = _WGK[7] * abs(fc - reskh) + float(
        _WGK[:7] @ (np.abs(f1 - reskh) + np.abs(f2 - reskh))
    )

    result = resk * hlgth
    resabs *= abs(hlgth)
    resasc *= abs(hlgth)
    err = abs((resk - resg) * hlgth)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > np.finfo(float).tiny / (50.0 * _EPS):
        err = max(50.0 * _EPS * resabs, err)
    return result, err


def integrate_finite(
    h: Integrand,
    lo: float,
    hi: float,
    rel_tol: Optional[float] = None,
    abs_tol: Optional[float] = None,
    max_panels: Optional[int] = None,
) -> QuadResult:
    """Integrate ``h`` over [lo, hi], always splitting the worst panel.

    ``lo > hi`` is accepted and returns the negated integral.
    """
    rel_tol = settings.QUAD_REL_TOL if rel_tol is None else rel_tol
    abs_tol = settings.QUAD_ABS_TOL if abs_tol is None else abs_tol
    max_panels = max_panels or settings.QUAD_MAX_PANELS

    if lo == hi:
        return QuadResult(value=0.0, abs_error_estimate=0.0, converged=True)
    if lo > hi:
        res = integrate_finite(h, hi, lo, rel_tol, abs_tol, max_panels)
        return res.model_copy(update={"value": -res.value})

    value, err = gauss_kronrod(h, lo, hi)
    # max-heap on error: (-err, lo, hi, value)
    panels: List[Tuple[float, float, float, float]] = [(-err, lo, hi, value)]
    total, total_err = value, err
    evaluations = 15

    while total_err > max(abs_tol, rel_tol * abs(total)):
        if len(panels) >= max_panels:
            logger.warning(
                "quadrature on [%r, %r] stopped at %d panels (err %.3g)",
                lo,
                hi,
                len(panels),
                total_err,
            )
            return QuadResult(
                value=total,
                abs_error_estimate=total_err,
                converged=False,
                evaluations=evaluations,
            )
        neg_err, a, b, v = heapq.heappop(panels)
        mid = 0.5 * (a + b)
        if not a < mid < b:
            heapq.heappush(panels, (neg_err, a, b, v))
            break
        v1, e1 = gauss_kronrod(h, a, mid)
        v2, e2 = gauss_kronrod(h, mid, b)
        evaluations += 30
        heapq.heappush(panels, (-e1, a, mid, v1))
        heapq.heappush(panels, (-e2, mid, b, v2))
        # resum to keep the running totals free of cancellation drift
        total = math.fsum(p[3] for p in panels)
        total_err = math.fsum(-p[0] for p in panels)

    converged = total_err <= max(abs_tol, rel_tol * abs(total))
    if len(panels) > 1:
        logger.debug("quadrature on [%r, %r] used %d panels", lo, hi, len(panels))
    return QuadResult(
        value=total,
        abs_error_estimate=total_err,
        converged=converged,
        evaluations=evaluations,
    )


def _nondecaying(increments: List[float]) -> bool:
    tail = [abs(d) for d in increments[-DIVERGENCE_RUN - 1 :]]
    if len(tail) < DIVERGENCE_RUN + 1:
        return False
    return all(b * GROWTH_FACTOR > a for a, b in zip(tail, tail[1:]))


def _geometric_ratio(increments: List[float]) -> Optional[float]:
    """Common ratio of the last three increment quotients, if stable."""
    if len(increments) < 4:
        return None
    last = increments[-4:]
    if any(d == 0.0 for d in last[:-1]):
        return None
    ratios = [b / a for a, b in zip(last, last[1:])]
    r = ratios[-1]
    if not 0.0 < r <= 1.0 / GROWTH_FACTOR:
        return None
    if max(ratios) - min(ratios) > RATIO_STABILITY * r:
        return None
    return r


def integrate_tail(
    h: Integrand,
    lo: float,
    rel_tol: Optional[float] = None,
    abs_tol: Optional[float] = None,
    max_doublings: Optional[int] = None,
    divergence_cap: Optional[float] = None,
) -> TailVerdict:
    """Decide convergence of the improper integral of ``h`` on [lo, inf).

    Partial integrals are taken on [lo, lo*2^k]. A run of geometrically
    decaying increments is closed off with the remaining geometric series.
    """
    rel_tol = settings.QUAD_REL_TOL if rel_tol is None else rel_tol
    abs_tol = settings.QUAD_ABS_TOL if abs_tol is None else abs_tol
    max_doublings = max_doublings or settings.TAIL_MAX_DOUBLINGS
    divergence_cap = divergence_cap or settings.TAIL_DIVERGENCE_CAP

    accumulated = 0.0
    quad_error = 0.0
    increments: List[float] = []
    horizons: List[float] = []
    evidence: List[float] = []
    extrapolations: List[float] = []
    left = lo

    def verdict(kind: str, **kw) -> TailVerdict:
        return TailVerdict(kind=kind, horizons=horizons, evidence=evidence, **kw)

    for k in range(1, max_doublings + 1):
        right = lo * 2.0**k
        piece = integrate_finite(h, left, right, 0.1 * rel_tol, 0.1 * abs_tol)
        left = right
        accumulated += piece.value
        quad_error += piece.abs_error_estimate
        increments.append(piece.value)
        horizons.append(right)
        evidence.append(accumulated)
        tol = max(abs_tol, rel_tol * abs(accumulated))

        if k >= 3 and all(abs(d) < tol for d in increments[-3:]):
            return verdict("convergent", value=accumulated, abs_error=quad_error)

        r = _geometric_ratio(increments)
        if r is None:
            extrapolations.clear()
        else:
            extrapolations.append(accumulated + increments[-1] * r / (1.0 - r))
            if len(extrapolations) >= 3:
                recent = extrapolations[-3:]
                if max(recent) - min(recent) <= tol:
                    return verdict(
                        "convergent",
                        value=recent[-1],
                        abs_error=quad_error + abs(recent[-1] - recent[-2]),
                        extrapolated=True,
                    )

        if _nondecaying(increments) and abs(accumulated) > divergence_cap:
            return verdict("divergent", abs_error=quad_error)

    if _nondecaying(increments):
        return verdict("divergent", abs_error=quad_error)
    logger.warning("tail integral from %r is inconclusive after %d doublings", lo, max_doublings)
    return verdict("inconclusive", value=accumulated, abs_error=quad_error)
