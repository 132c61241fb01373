"""Built-in acceptance suite reproducing the closed-form examples and theorem instances."""

import logging
import math
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from oblique.schemas.problem import IvpSpec
from oblique.schemas.reports import ConditionVerdict
from oblique.schemas.run import AcceptanceCheck, SuiteReport
from oblique.schemas.scenario import Range, Scenario
from oblique.schemas.states import UvState, XState
from oblique.services.asymptote_service import AsymptoteService
from oblique.services.hypothesis_service import HypothesisService
from oblique.services.integrator_service import IntegratorService
from oblique.services.lyapunov_service import LyapunovService
from oblique.services.problem_service import ProblemService
from oblique.services.scenario_service import ScenarioService
from oblique.services.transform_service import TransformService
from oblique.utils.quadrature import integrate_tail


logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
EPS = float(np.finfo(float).eps)
ORDER_LADDERS = {
    "free-motion": (1e-6, 5e-7, 2.5e-7, 1.25e-7),
    "blowup": (1e-6, 5e-7, 2.5e-7, 1.25e-7),
    # coarser tolerances are outside the asymptotic regime on t^2
    "growth": (1e-10, 5e-11, 2.5e-11, 1.25e-11),
}
ORDER_ABS_TOL = 1e-14


def _check(name: str, passed: bool, detail: str = "", **values: Optional[float]) -> AcceptanceCheck:
    clean = {k: (None if v is None else float(v)) for k, v in values.items()}
    return AcceptanceCheck(name=name, passed=bool(passed), detail="" if passed else detail, values=clean)


def _verdict(verdicts: List[ConditionVerdict], name: str) -> ConditionVerdict:
    return next(v for v in verdicts if v.name == name)


def _close(value: Optional[float], target: float, tol: float) -> bool:
    return value is not None and abs(value - target) <= tol


class PaperService:
    @staticmethod
    def scenario(name: str, scenario_dir: Optional[Path] = None) -> Scenario:
        return ScenarioService.load_scenario((scenario_dir or SCENARIO_DIR) / f"{name}.yaml")

    @staticmethod
    def free_motion(d: Optional[Path] = None) -> List[AcceptanceCheck]:
        sc = PaperService.scenario("free-motion", d)
        nl, ivp, traj = ScenarioService.integrate(sc)
        x_end = float(traj.x[-1])
        rel = abs(x_end - 199.0) / 199.0
        est = AsymptoteService.estimate(traj, sc.classification.window, sc.classification)
        cls = AsymptoteService.classify(traj, est, sc.classification)
        linear = cls.kind == "AsymptoticallyLinear"
        return [
            _check("free_motion.endpoint", rel <= 1e-9 and traj.t_last == 100.0, f"relative error {rel!r}", x_end=x_end, rel_error=rel),
            _check(
                "free_motion.classification",
                linear and _close(cls.x1, 2.0, 1e-9) and _close(cls.x2, -1.0, 1e-9),
                f"got {cls.kind} x1={cls.x1!r} x2={cls.x2!r}",
                x1=cls.x1,
                x2=cls.x2,
            ),
        ]

    @staticmethod
    def blowup(d: Optional[Path] = None) -> List[AcceptanceCheck]:
        sc = PaperService.scenario("blowup", d)
        nl, ef = ScenarioService.build_problem(sc)
        ivp = ScenarioService.ivp(sc)
        traj = IntegratorService.integrate(nl, ivp, ScenarioService.integration_config(sc))
        cls = AsymptoteService.classify(traj, None, sc.classification)
        t_inf = cls.t_inf_estimate
        (state,) = IntegratorService.resample(traj, [1.9])
        x = state.t * state.v
        rel = abs(x - 10.0) / 10.0
        threshold = _verdict(HypothesisService.check_ef_negative(ef, ivp), "threshold_15")
        return [
            _check(
                "blowup.t_inf",
                cls.kind == "Blowup" and _close(t_inf, 2.0, 1e-3),
                f"got {cls.kind} with T_inf={t_inf!r}",
                t_inf=t_inf,
                uncertainty=cls.t_inf_uncertainty,
            ),
            _check("blowup.x_at_1.9", rel <= 1e-6, f"x(1.9)={x!r}", x=x, rel_error=rel),
            _check(
                "blowup.threshold_15_fails",
                threshold.status == "fails" and threshold.computed["lhs"] > 48.0,
                f"threshold_15 is {threshold.status}",
                lhs=threshold.computed.get("lhs"),
                rhs=threshold.computed.get("rhs"),
            ),
        ]

    @staticmethod
    def growth(d: Optional[Path] = None) -> List[AcceptanceCheck]:
        sc = PaperService.scenario("growth", d)
        nl, ivp, traj = ScenarioService.integrate(sc)
        rel = float(np.max(np.abs(traj.x - traj.t**2) / traj.t**2))
        cls = AsymptoteService.classify(traj, None, sc.classification)
        threshold = _verdict(HypothesisService.check_theorem1(nl, ivp), "threshold")
        lhs, rhs = threshold.computed.get("lhs"), threshold.computed.get("rhs")
        return [
            _check("growth.tracks_t_squared", rel <= 1e-6 and traj.t_last == 100.0, f"max relative error {rel!r}", rel_error=rel),
            _check("growth.unbounded", cls.kind == "Unbounded", f"got {cls.kind}"),
            _check(
                "growth.threshold_fails",
                threshold.status == "fails" and _close(lhs, 14.0, 1e-8) and _close(rhs, 0.125, 1e-8),
                f"threshold {threshold.status} lhs={lhs!r} rhs={rhs!r}",
                lhs=lhs,
                rhs=rhs,
            ),
        ]

    @staticmethod
    def theorem1_demo(d: Optional[Path] = None) -> List[AcceptanceCheck]:
        sc = PaperService.scenario("theorem1-demo", d)
        nl, ef = ScenarioService.build_problem(sc)
        ivp = ScenarioService.ivp(sc)
        t1 = HypothesisService.check_theorem1(nl, ivp)
        threshold = _verdict(t1, "threshold")
        k = _verdict(t1, "K_finite").computed.get("K")
        ef15 = _verdict(HypothesisService.check_ef_negative(ef, ivp), "threshold_15")
        checks = [
            _check(
                "theorem1_demo.hypotheses_hold",
                all(v.status == "holds" for v in t1),
                "; ".join(f"{v.name}={v.status}" for v in t1 if v.status != "holds"),
            ),
            _check(
                "theorem1_demo.threshold_10",
                _close(k, 0.01, 1e-8)
                and threshold.computed.get("c") == 1.0
                and _close(threshold.computed.get("lhs"), 0.0404, 1e-8)
                and _close(threshold.computed.get("rhs"), 2.0 / 9.0, 1e-8),
                f"K={k!r} computed={threshold.computed!r}",
                K=k,
                lhs=threshold.computed.get("lhs"),
                rhs=threshold.computed.get("rhs"),
            ),
            _check(
                "theorem1_demo.threshold_15",
                ef15.status == "holds"
                and _close(ef15.computed.get("lhs"), 0.0404, 1e-8)
                and _close(ef15.computed.get("rhs"), 1.0 / (4.0 * 1.5**4), 1e-8),
                f"threshold_15 {ef15.status} computed={ef15.computed!r}",
                lhs=ef15.computed.get("lhs"),
                rhs=ef15.computed.get("rhs"),
            ),
            _check(
                "theorem1_demo.derived_constants",
                ProblemService.derived_constants(IvpSpec(t0=100.0, x0=50.0, xp0=0.0)) == (-50.0, 0.5, 1251.0),
                "derived constants of (100, 50, 0) differ from (-50, 0.5, 1251)",
            ),
        ]

        traj = IntegratorService.integrate(nl, ivp, ScenarioService.integration_config(sc))
        v1 = LyapunovService.monitor_v1(nl, ivp, traj)
        chain = LyapunovService.bound_chain(nl, ivp, traj)
        est = AsymptoteService.estimate(traj, sc.classification.window, sc.classification)
        cls = AsymptoteService.classify(traj, est, sc.classification)
        agree = cls.kind != "AsymptoticallyLinear" or est.consistency_residual <= 1e-5
        checks += [
            _check("theorem1_demo.no_blowup", traj.termination.kind == "reached_horizon", f"ended with {traj.termination.kind}"),
            _check("theorem1_demo.v1_monotone", v1.passed, f"{len(v1.violations)} violation(s)", max_increase=v1.max_increase),
            _check("theorem1_demo.bound_chain", chain.passed and chain.wintner_passed, f"max ratio {chain.max_ratio!r}", max_ratio=chain.max_ratio),
            _check(
                "theorem1_demo.classification",
                cls.kind in ("Sublinear", "AsymptoticallyLinear") and agree,
                f"got {cls.kind}, residual {est.consistency_residual!r}",
                x1=cls.x1,
                x2=cls.x2,
                residual=est.consistency_residual,
            ),
        ]

        rest = IvpSpec(t0=100.0, x0=50.0, xp0=0.0)
        rest_traj = IntegratorService.integrate(nl, rest, ScenarioService.integration_config(sc))
        rest_v1 = LyapunovService.monitor_v1(nl, rest, rest_traj)
        rest_chain = LyapunovService.bound_chain(nl, rest, rest_traj)
        checks.append(
            _check(
                "theorem1_demo.rest_start_monitors",
                rest_v1.passed and rest_chain.passed and rest_traj.termination.kind == "reached_horizon",
                f"V1 passed={rest_v1.passed}, chain passed={rest_chain.passed}",
            )
        )
        return checks

    @staticmethod
    def caligo(d: Optional[Path] = None) -> List[AcceptanceCheck]:
        sc = PaperService.scenario("caligo", d)
        nl, ef = ScenarioService.build_problem(sc)
        ivp = ScenarioService.ivp(sc)
        grid = ScenarioService.sampling_grid(sc)
        traj = IntegratorService.integrate(nl, ivp, ScenarioService.integration_config(sc))
        v2 = LyapunovService.monitor_v2(nl, traj)
        start = LyapunovService.v2(nl, UvState(t=ivp.t0, u=ivp.u0, v=ivp.v0))
        exact = 0.5 * (ivp.u0**2 + ivp.v0**2)
        caligo = HypothesisService.check_caligo(ef, grid)
        comparisons = HypothesisService.check_comparisons(ef, ivp.t0)
        est = AsymptoteService.estimate(traj, sc.classification.window, sc.classification)
        cls = AsymptoteService.classify(traj, est, sc.classification)
        return [
            _check(
                "caligo.v2_conserved",
                v2.passed and v2.drift <= v2.total_slack and abs(start.value - exact) <= 1e-12 * exact,
                f"drift {v2.drift!r} vs slack {v2.total_slack!r}",
                drift=v2.drift,
                slack=v2.total_slack,
                v2_start=start.value,
            ),
            _check("caligo.condition_holds", all(v.status == "holds" for v in caligo), "caligo checks did not all hold"),
            _check(
                "caligo.comparisons_hold",
                all(v.status == "holds" for v in comparisons),
                "; ".join(f"{v.name}={v.status}" for v in comparisons),
            ),
            _check(
                "caligo.classification",
                cls.kind not in ("Blowup", "Unbounded"),
                f"got {cls.kind}",
                x1=cls.x1,
                x2=cls.x2,
            ),
        ]

    @staticmethod
    def negative_controls(d: Optional[Path] = None) -> List[AcceptanceCheck]:
        sc = PaperService.scenario("caligo-control", d)
        _, ef = ScenarioService.build_problem(sc)
        caligo = _verdict(HypothesisService.check_caligo(ef, ScenarioService.sampling_grid(sc)), "caligo_16")

        sc = PaperService.scenario("sign-control", d)
        nl, _ = ScenarioService.build_problem(sc)
        sign_vf = _verdict(HypothesisService.check_theorem1(nl, ScenarioService.ivp(sc)), "sign_vf")

        sc = PaperService.scenario("waltman-control", d)
        _, ef2 = ScenarioService.build_problem(sc)
        comparisons = HypothesisService.check_comparisons(ef2, sc.ivp.t0)
        waltman, star = _verdict(comparisons, "waltman"), _verdict(comparisons, "star")
        return [
            _check("controls.caligo_fails", caligo.status == "fails" and caligo.witness is not None, f"caligo_16 {caligo.status}"),
            _check("controls.sign_vf_fails", sign_vf.status == "fails" and sign_vf.witness is not None, f"sign_vf {sign_vf.status}"),
            _check(
                "controls.waltman_star_fail",
                waltman.status == "fails" and star.status == "fails",
                f"waltman {waltman.status}, star {star.status}",
            ),
        ]

    @staticmethod
    def quadrature_oracles() -> List[AcceptanceCheck]:
        cases = [
            ("t^-2 from 100", lambda t: t**-2, 100.0, 0.01),
            ("xi^-3 from 1.5", lambda x: x**-3, 1.5, 2.0 / 9.0),
            ("xi^-3 from 1", lambda x: x**-3, 1.0, 0.5),
        ]
        checks = []
        for label, h, lo, exact in cases:
            tail = integrate_tail(h, lo)
            checks.append(
                _check(
                    f"quadrature.{label}",
                    tail.convergent and _close(tail.value, exact, 1e-8),
                    f"{tail.kind} {tail.value!r}",
                    value=tail.value,
                )
            )
        harmonic = integrate_tail(lambda t: 1.0 / t, 1.0)
        checks.append(_check("quadrature.harmonic_divergent", harmonic.kind == "divergent", f"got {harmonic.kind}"))
        return checks

    @staticmethod
    def transform_properties(seed: int = 0) -> List[AcceptanceCheck]:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(10_000):
            t = float(10.0 ** rng.uniform(0.0, 6.0))
            s = UvState(t=t, u=float(rng.normal(scale=10.0)), v=float(rng.normal(scale=10.0)))
            back = TransformService.to_uv(TransformService.from_uv(s))
            du = abs(back.u - s.u) / (4 * EPS * (abs(s.u) + abs(t * s.v)) or 1.0)
            dv = abs(back.v - s.v) / (4 * EPS * abs(s.v) or 1.0)
            worst = max(worst, du, dv, abs(back.t - s.t))
        line_worst = 0.0
        for _ in range(100):
            x1, x2 = (float(z) for z in rng.normal(size=2) * 10.0)
            for t in (1.0, 10.0, 1e3, 1e6):
                s = TransformService.to_uv(XState(t=t, x=x1 * t + x2, xp=x1))
                line_worst = max(line_worst, abs(s.u + x2) / (4 * EPS * (abs(x2) + abs(x1 * t))))
        return [
            _check("transform.round_trip", worst <= 1.0, f"worst scaled error {worst!r}", worst=worst),
            _check("transform.line_u_constant", line_worst <= 1.0, f"worst scaled error {line_worst!r}", worst=line_worst),
        ]

    @staticmethod
    def order_check(d: Optional[Path] = None) -> List[AcceptanceCheck]:
        problems = {
            "free-motion": (100.0, lambda t: 2.0 * t - 1.0),
            "blowup": (1.9, lambda t: 1.0 / (2.0 - t)),
            "growth": (100.0, lambda t: t * t),
        }
        checks = []
        for name, (t_end, exact) in problems.items():
            sc = PaperService.scenario(name, d)
            nl, _ = ScenarioService.build_problem(sc)
            ivp = ScenarioService.ivp(sc)
            base = ScenarioService.integration_config(sc)
            errors, costs = [], []
            for rel_tol in ORDER_LADDERS[name]:
                cfg = base.model_copy(update={"rel_tol": rel_tol, "abs_tol": ORDER_ABS_TOL, "t_end": t_end})
                traj = IntegratorService.integrate(nl, ivp, cfg)
                errors.append(abs(float(traj.x[-1]) - exact(t_end)))
                costs.append(traj.evaluations)
            monotone = all(b < a for a, b in zip(errors, errors[1:]))
            order = math.log(errors[0] / errors[-1]) / math.log(costs[-1] / costs[0]) if costs[-1] > costs[0] and errors[-1] > 0 else 0.0
            checks.append(
                _check(
                    f"order.{name}",
                    monotone and order >= 4.0,
                    f"errors {errors!r}, evaluations {costs!r}",
                    observed_order=order,
                )
            )
        return checks

    @staticmethod
    def sweep_determinism(d: Optional[Path] = None) -> List[AcceptanceCheck]:
        sc = ScenarioService.with_overrides(PaperService.scenario("theorem1-demo", d), horizon=1e4)
        x0, xp0 = Range(lo=40.0, hi=60.0, count=16), Range(lo=0.0, hi=1.0, count=16)
        serial = ScenarioService.sweep(sc, x0, xp0, workers=1)
        parallel = ScenarioService.sweep(sc, x0, xp0, workers=4)
        same = serial.model_dump_json() == parallel.model_dump_json()
        return [_check("sweep.worker_invariance", same and len(serial.points) == 256, "sweep output depends on worker count")]

    @staticmethod
    def verify_paper(scenario_dir: Optional[Path] = None) -> SuiteReport:
        groups: Dict[str, Callable[[], List[AcceptanceCheck]]] = {
            "free_motion": lambda: PaperService.free_motion(scenario_dir),
            "blowup": lambda: PaperService.blowup(scenario_dir),
            "growth": lambda: PaperService.growth(scenario_dir),
            "theorem1_demo": lambda: PaperService.theorem1_demo(scenario_dir),
            "caligo": lambda: PaperService.caligo(scenario_dir),
            "negative_controls": lambda: PaperService.negative_controls(scenario_dir),
            "quadrature": PaperService.quadrature_oracles,
            "transform": PaperService.transform_properties,
            "order": lambda: PaperService.order_check(scenario_dir),
            "sweep": lambda: PaperService.sweep_determinism(scenario_dir),
        }
        checks: List[AcceptanceCheck] = []
        timings: Dict[str, float] = {}
        for group, fn in groups.items():
            start = time.perf_counter()
            logger.info("acceptance group %s", group)
            try:
                checks.extend(fn())
            except Exception as e:
                checks.append(_check(f"{group}.error", False, f"Failed to run {group}: {str(e)}"))
            timings[group] = time.perf_counter() - start
        report = SuiteReport(passed=all(c.passed for c in checks), checks=checks, timings=timings)
        logger.info("acceptance suite: %d/%d passed", sum(c.passed for c in checks), len(checks))
        return report

