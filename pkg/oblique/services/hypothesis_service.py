import logging
import math
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from oblique.core.errors import EvaluationError
from oblique.schemas.integration import Trajectory
from oblique.schemas.problem import EmdenFowlerCoeff, IvpSpec, Nonlinearity
from oblique.schemas.reports import ConditionVerdict, SamplingGrid, TailVerdict, Witness
from oblique.utils.helpers import log_spaced
from oblique.utils.quadrature import integrate_tail


logger = logging.getLogger(__name__)

MARGIN_FACTOR = 10.0
EXACT_REL_SLACK = 1e-12
FD_REL_SLACK = 1e-6

# value at a grid point -> (quantity, slack); a violation is quantity > slack
PointCheck = Callable[[float, float], Tuple[float, float]]


def _compare(name: str, lhs: float, rhs: float, err: float, strict: bool, computed: Dict[str, float]) -> ConditionVerdict:
    """Compare lhs against rhs with a noise band of 10x the quadrature error."""
    margin = rhs - lhs
    band = MARGIN_FACTOR * err
    computed = {**computed, "lhs": lhs, "rhs": rhs, "margin": margin, "quad_error": err}
    if strict:
        holds = margin > band
        fails = margin < -band or (band == 0.0 and margin <= 0.0)
    else:
        holds = margin >= band
        fails = margin < -band
    if holds:
        status = "holds"
    elif fails:
        status = "fails"
    else:
        status = "inconclusive"
    witness = Witness(values={"lhs": lhs, "rhs": rhs}) if status == "fails" else None
    note = None
    if status == "inconclusive":
        note = f"margin {margin!r} is within the quadrature noise band {band!r}"
    return ConditionVerdict(name=name, status=status, computed=computed, witness=witness, note=note)


def _tail_verdict(name: str, tail: TailVerdict, computed_key: str) -> ConditionVerdict:
    if tail.kind == "convergent":
        return ConditionVerdict(
            name=name,
            status="holds",
            computed={computed_key: tail.value, "quad_error": tail.abs_error},
        )
    if tail.kind == "divergent":
        return ConditionVerdict(
            name=name,
            status="fails",
            witness=Witness(t=tail.horizons[-1], values={"partial_integral": tail.evidence[-1]}),
            note="partial integrals do not settle over the doubling schedule",
        )
    return ConditionVerdict(
        name=name,
        status="inconclusive",
        computed={"partial_integral": tail.value or 0.0},
        note="tail neither settled nor diverged within the doubling budget",
    )


def _missing(name: str, why: str) -> ConditionVerdict:
    return ConditionVerdict(name=name, status="inconclusive", note=why)


class _NonPositiveEnvelope(EvaluationError):
    def __init__(self, xi: float, g: float):
        super().__init__(f"envelope g is not positive at xi={xi!r}")
        self.xi = xi
        self.g = g


def _inverse(g: Callable[[float], float]) -> Callable[[float], float]:
    def h(xi: float) -> float:
        gv = g(xi)
        if gv <= 0.0:
            raise _NonPositiveEnvelope(xi, gv)
        return 1.0 / gv

    return h


def _not_positive(name: str, e: _NonPositiveEnvelope) -> ConditionVerdict:
    return ConditionVerdict(
        name=name,
        status="fails",
        witness=Witness(v=e.xi, values={"g": e.g}),
        note="g must be positive on the integration range",
    )


def _inverse_tail(
    g: Callable[[float], float], lo: float, rel_tol: Optional[float], abs_tol: Optional[float]
) -> TailVerdict:
    """int_lo^inf dxi/g(xi); raises _NonPositiveEnvelope where g <= 0."""
    h = _inverse(g)
    h(lo)
    return integrate_tail(h, lo, rel_tol, abs_tol)


class HypothesisService:
    @staticmethod
    def default_grid(t0: float) -> SamplingGrid:
        return SamplingGrid(t_range=(t0, 1e6 * t0))

    @staticmethod
    def grid_points(grid: SamplingGrid) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = grid.t_range
        if grid.t_spacing == "logarithmic":
            ts = log_spaced(lo, hi, grid.t_count)
        else:
            ts = np.linspace(lo, hi, grid.t_count)
        vs = np.linspace(-grid.v_max, grid.v_max, grid.v_count)
        return ts, vs

    @staticmethod
    def _sampled(
        name: str,
        grid: SamplingGrid,
        check: PointCheck,
        quantity: str,
        skip_zero_v: bool = False,
        t_only: bool = False,
    ) -> ConditionVerdict:
        """Run ``check`` over the grid; report the worst violation as witness."""
        ts, vs = HypothesisService.grid_points(grid)
        if t_only:
            vs = np.array([0.0])
        worst: Optional[Tuple[float, float, float, float]] = None
        violations = 0
        for t in ts:
            for v in vs:
                if skip_zero_v and v == 0.0:
                    continue
                value, slack = check(float(t), float(v))
                if value > slack:
                    violations += 1
                    if worst is None or value - slack > worst[0]:
                        worst = (value - slack, float(t), float(v), value)
        if worst is None:
            return ConditionVerdict(name=name, status="holds", grid=grid, computed={"violations": 0.0})
        _, t, v, value = worst
        logger.info("%s fails at %d grid point(s); worst at t=%r v=%r", name, violations, t, v)
        return ConditionVerdict(
            name=name,
            status="fails",
            grid=grid,
            witness=Witness(t=t, v=None if t_only else v, values={quantity: value}),
            computed={"violations": float(violations)},
        )

    @staticmethod
    def _envelope(nl: Nonlinearity, grid: SamplingGrid) -> ConditionVerdict:
        a, g, f = nl.envelope_a, nl.envelope_g, nl.f
        verdict = HypothesisService._sampled(
            "envelope",
            grid,
            lambda t, v: (abs(f(t, v)) - a(t) * g(abs(v)), EXACT_REL_SLACK * a(t) * g(abs(v))),
            "abs_f_minus_ag",
        )
        if verdict.status == "fails":
            return verdict
        _, vs = HypothesisService.grid_points(grid)
        xis = np.unique(np.concatenate(([1.0], np.abs(vs[vs != 0.0]))))
        gs = [g(float(xi)) for xi in xis]
        for xi, gv in zip(xis, gs):
            if gv <= 0.0:
                return ConditionVerdict(
                    name="envelope",
                    status="fails",
                    grid=grid,
                    witness=Witness(v=float(xi), values={"g": gv}),
                    note="g must be positive for xi > 0",
                )
        for (x1, g1), (x2, g2) in zip(zip(xis, gs), zip(xis[1:], gs[1:])):
            if g2 < g1 * (1.0 - EXACT_REL_SLACK):
                return ConditionVerdict(
                    name="envelope",
                    status="fails",
                    grid=grid,
                    witness=Witness(v=float(x2), values={"g_prev": g1, "g": g2, "xi_prev": float(x1)}),
                    note="g must be nondecreasing",
                )
        return verdict

    @staticmethod
    def check_theorem1(
        nl: Nonlinearity,
        ivp: IvpSpec,
        grid: Optional[SamplingGrid] = None,
        rel_tol: Optional[float] = None,
        abs_tol: Optional[float] = None,
    ) -> List[ConditionVerdict]:
        grid = grid or HypothesisService.default_grid(ivp.t0)
        f = nl.f
        verdicts = [
            HypothesisService._sampled("sign_vf", grid, lambda t, v: (v * f(t, v), 0.0), "vf"),
        ]

        fd_slack = 0.0
        if nl.df_dv is None:
            ts, vs = HypothesisService.grid_points(grid)
            scale = max(abs(nl.dfdv(float(t), float(v))) for t in ts[::16] for v in vs[::8])
            fd_slack = FD_REL_SLACK * scale
        verdicts.append(
            HypothesisService._sampled("sign_dfdv", grid, lambda t, v: (nl.dfdv(t, v), fd_slack), "df_dv")
        )

        if not nl.has_envelope:
            why = "no envelope pair (a, g) was given"
            return verdicts + [_missing(n, why) for n in ("envelope", "K_finite", "g_tail", "threshold")]

        a, g = nl.envelope_a, nl.envelope_g
        verdicts.append(HypothesisService._envelope(nl, grid))

        k_tail = integrate_tail(lambda t: t * a(t), ivp.t0, rel_tol, abs_tol)
        verdicts.append(_tail_verdict("K_finite", k_tail, "K"))
        try:
            g_tail = _inverse_tail(g, 1.0, rel_tol, abs_tol)
            verdicts.append(_tail_verdict("g_tail", g_tail, "integral"))
        except _NonPositiveEnvelope as e:
            verdicts.append(_not_positive("g_tail", e))

        verdicts.append(HypothesisService.threshold_10(nl, ivp, rel_tol, abs_tol, k_tail))
        return verdicts

    @staticmethod
    def threshold_10(
        nl: Nonlinearity,
        ivp: IvpSpec,
        rel_tol: Optional[float] = None,
        abs_tol: Optional[float] = None,
        k_tail: Optional[TailVerdict] = None,
    ) -> ConditionVerdict:
        """(4/t0)(K + c/g(1)) < int_{1+|v0|}^inf dxi/g(xi), strict."""
        if not nl.has_envelope:
            return _missing("threshold", "no envelope pair (a, g) was given")
        a, g = nl.envelope_a, nl.envelope_g
        if k_tail is None:
            k_tail = integrate_tail(lambda t: t * a(t), ivp.t0, rel_tol, abs_tol)
        try:
            _inverse(g)(1.0)
            g1 = g(1.0)
            rhs_tail = _inverse_tail(g, 1.0 + abs(ivp.v0), rel_tol, abs_tol)
        except _NonPositiveEnvelope as e:
            return _not_positive("threshold", e)
        if not (k_tail.convergent and rhs_tail.convergent):
            return _missing("threshold", "K or the right-hand tail integral did not converge")
        c = ivp.c
        lhs = (4.0 / ivp.t0) * (k_tail.value + c / g1)
        err = (4.0 / ivp.t0) * k_tail.abs_error + rhs_tail.abs_error
        return _compare("threshold", lhs, rhs_tail.value, err, True, {"K": k_tail.value, "c": c, "g1": g1})

    @staticmethod
    def check_theorem2(nl: Nonlinearity, grid: SamplingGrid) -> List[ConditionVerdict]:
        f = nl.f
        rel = EXACT_REL_SLACK if nl.df_dt is not None else FD_REL_SLACK

        def growth(t: float, v: float) -> Tuple[float, float]:
            three_f, t_ft = 3.0 * f(t, v), t * nl.dfdt(t, v)
            return v * (three_f + t_ft), rel * abs(v) * (abs(three_f) + abs(t_ft))

        return [
            HypothesisService._sampled("sign_vf", grid, lambda t, v: (-v * f(t, v), 0.0), "minus_vf", skip_zero_v=True),
            HypothesisService._sampled("growth_3f_tft", grid, growth, "v_3f_plus_t_dfdt", skip_zero_v=True),
        ]

    @staticmethod
    def _A_sign(ef: EmdenFowlerCoeff, grid: SamplingGrid, sign: float, name: str) -> ConditionVerdict:
        return HypothesisService._sampled(
            name, grid, lambda t, v: (sign * ef.A(t), 0.0), "A", t_only=True
        )

    @staticmethod
    def check_ef_negative(
        ef: EmdenFowlerCoeff,
        ivp: IvpSpec,
        grid: Optional[SamplingGrid] = None,
        rel_tol: Optional[float] = None,
        abs_tol: Optional[float] = None,
    ) -> List[ConditionVerdict]:
        grid = grid or HypothesisService.default_grid(ivp.t0)
        n, A = ef.n, ef.A
        verdicts = [HypothesisService._A_sign(ef, grid, 1.0, "A_nonpositive")]

        tail = integrate_tail(lambda t: t ** (2 * n) * abs(A(t)), ivp.t0, rel_tol, abs_tol)
        if not tail.convergent:
            verdicts.append(_missing("threshold_15", f"integral of t^(2n)|A| is {tail.kind}"))
            return verdicts
        c = ivp.c
        lhs = (4.0 / ivp.t0) * (c + tail.value)
        rhs = 1.0 / (2 * n * (1.0 + abs(ivp.v0)) ** (2 * n))
        err = (4.0 / ivp.t0) * tail.abs_error
        verdicts.append(
            _compare("threshold_15", lhs, rhs, err, False, {"integral": tail.value, "c": c})
        )
        return verdicts

    @staticmethod
    def check_caligo(ef: EmdenFowlerCoeff, grid: SamplingGrid) -> List[ConditionVerdict]:
        n, A = ef.n, ef.A
        rel = EXACT_REL_SLACK if ef.dA_dt is not None else FD_REL_SLACK

        def caligo(t: float, v: float) -> Tuple[float, float]:
            first, second = (2 * n + 2) * A(t), t * ef.dAdt(t)
            return first + second, rel * (abs(first) + abs(second))

        t0 = grid.t_range[0]
        c = A(t0) * t0 ** (2 * n + 2)

        def envelope(t: float, v: float) -> Tuple[float, float]:
            cap = c * t ** -(2 * n + 2)
            return A(t) - cap, rel * abs(cap)

        implied = HypothesisService._sampled("caligo_envelope", grid, envelope, "A_minus_bound", t_only=True)
        implied = implied.model_copy(update={"computed": {**implied.computed, "c": c}})
        return [
            HypothesisService._A_sign(ef, grid, -1.0, "A_nonnegative"),
            HypothesisService._sampled("caligo_16", grid, caligo, "caligo_lhs", t_only=True),
            implied,
        ]

    @staticmethod
    def check_comparisons(
        ef: EmdenFowlerCoeff,
        t0: float,
        rel_tol: Optional[float] = None,
        abs_tol: Optional[float] = None,
        grid: Optional[SamplingGrid] = None,
    ) -> List[ConditionVerdict]:
        grid = grid or HypothesisService.default_grid(t0)
        n, A = ef.n, ef.A
        waltman = integrate_tail(lambda s: s ** (2 * n) * A(s), t0, rel_tol, abs_tol)
        star = integrate_tail(lambda s: s ** (2 * n - 1) * A(s), t0, rel_tol, abs_tol)
        rel = 0.0 if ef.dA_dt is not None else FD_REL_SLACK
        scale = abs(A(t0)) / t0
        return [
            _tail_verdict("waltman", waltman, "integral"),
            HypothesisService._sampled(
                "potter", grid, lambda t, v: (ef.dAdt(t), rel * scale), "dA_dt", t_only=True
            ),
            _tail_verdict("star", star, "integral"),
        ]

    @staticmethod
    def sign_changes(values: Iterable[float]) -> int:
        count, last = 0, 0.0
        for value in values:
            if value == 0.0 or math.isnan(value):
                continue
            if last and (value > 0.0) != (last > 0.0):
                count += 1
            last = value
        return count

    @staticmethod
    def count_sign_changes(traj: Trajectory) -> int:
        """Strict sign changes of x = t v over the stored samples."""
        return HypothesisService.sign_changes(traj.x)
