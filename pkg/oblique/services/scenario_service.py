import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError
from tqdm import tqdm

from oblique.core.config import settings
from oblique.core.errors import ConfigError, ObliqueError
from oblique.schemas.integration import IntegrationConfig, Trajectory
from oblique.schemas.problem import EmdenFowlerCoeff, IvpSpec, Nonlinearity
from oblique.schemas.reports import SamplingGrid
from oblique.schemas.run import RunReport, SweepPoint, SweepReport, TrajectorySummary
from oblique.schemas.scenario import Coefficient, EmdenFowlerProblem, Piecewise, Range, Scenario
from oblique.services.asymptote_service import AsymptoteService
from oblique.services.hypothesis_service import HypothesisService
from oblique.services.integrator_service import IntegratorService
from oblique.services.lyapunov_service import LyapunovService
from oblique.services.problem_service import ProblemService
from oblique.utils.expr import parse


logger = logging.getLogger(__name__)


def _format_validation(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(p) for p in err["loc"])
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def _piecewise(pw: Piecewise) -> Callable[[float], float]:
    starts = [s.start for s in pw.segments]
    pieces = [parse(s.expr, ["t"]).bind("t") for s in pw.segments]
    first, last = pw.segments[0].start, pw.segments[-1].end
    default = parse(pw.default, ["t"]).bind("t")

    def A(t: float) -> float:
        if t < first or t > last:
            return default(t)
        i = int(np.searchsorted(starts, t, side="right")) - 1
        return pieces[i](t)

    return A


def _coefficient(spec: Coefficient) -> Callable[[float], float]:
    if isinstance(spec, str):
        return parse(spec, ["t"]).bind("t")
    return _piecewise(spec)


class ScenarioService:
    @staticmethod
    def load_scenario(path: Union[str, Path]) -> Scenario:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"scenario file not found: {path}")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
            raise ConfigError(f"{path}: YAML parse error{where}: {getattr(e, 'problem', e)}")
        return ScenarioService.from_dict(data, source=str(path))

    @staticmethod
    def from_dict(data: object, source: str = "<scenario>") -> Scenario:
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: scenario must be a mapping")
        try:
            return Scenario.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"{source}: {_format_validation(e)}")

    @staticmethod
    def build_problem(scenario: Scenario) -> Tuple[Nonlinearity, Optional[EmdenFowlerCoeff]]:
        problem = scenario.problem
        if isinstance(problem, EmdenFowlerProblem):
            ef = EmdenFowlerCoeff(
                n=problem.n,
                A=_coefficient(problem.A),
                dA_dt=_coefficient(problem.dA_dt) if problem.dA_dt is not None else None,
                label=scenario.name,
            )
            return ProblemService.to_nonlinearity(ef), ef

        def field_fn(src: Optional[str]):
            return parse(src, ["t", "v"]).bind("t", "v") if src else None

        nl = Nonlinearity(
            f=field_fn(problem.f),
            df_dv=field_fn(problem.df_dv),
            df_dt=field_fn(problem.df_dt),
            envelope_a=parse(problem.envelope_a, ["t"]).bind("t") if problem.envelope_a else None,
            envelope_g=parse(problem.envelope_g, ["xi"]).bind("xi") if problem.envelope_g else None,
            label=scenario.name,
        )
        return nl, None

    @staticmethod
    def ivp(scenario: Scenario) -> IvpSpec:
        return IvpSpec(t0=scenario.ivp.t0, x0=scenario.ivp.x0, xp0=scenario.ivp.xp0)

    @staticmethod
    def integration_config(scenario: Scenario) -> IntegrationConfig:
        s = scenario.integration
        return IntegrationConfig(
            rel_tol=s.rel_tol,
            abs_tol=s.abs_tol,
            t_end=s.horizon,
            blowup_threshold=s.blowup_threshold,
            h_min_factor=s.h_min_factor,
            max_steps=s.max_steps,
            sample_stride=s.sample_stride,
            breakpoints=scenario.breakpoints,
        )

    @staticmethod
    def sampling_grid(scenario: Scenario) -> SamplingGrid:
        g, t0 = scenario.grid, scenario.ivp.t0
        return SamplingGrid(
            t_range=(t0, g.t_max if g.t_max is not None else 1e6 * t0),
            t_count=g.t_count,
            v_max=g.v_max,
            v_count=g.v_count,
            t_spacing=g.t_spacing,
        )

    @staticmethod
    def with_overrides(
        scenario: Scenario, horizon: Optional[float] = None, rel_tol: Optional[float] = None
    ) -> Scenario:
        update = {}
        if horizon is not None:
            update["horizon"] = horizon
        if rel_tol is not None:
            update["rel_tol"] = rel_tol
        if not update:
            return scenario
        data = scenario.model_dump(by_alias=True)
        data["integration"].update(update)
        return ScenarioService.from_dict(data, source=f"{scenario.name} (overrides)")

    @staticmethod
    def checks(scenario: Scenario, nl: Nonlinearity, ef: Optional[EmdenFowlerCoeff], ivp: IvpSpec) -> Dict[str, list]:
        grid = ScenarioService.sampling_grid(scenario)
        verdicts: Dict[str, list] = {}
        for name in scenario.checks:
            logger.info("running check %s", name)
            if name == "theorem1":
                verdicts[name] = HypothesisService.check_theorem1(nl, ivp, grid)
            elif name == "theorem2":
                verdicts[name] = HypothesisService.check_theorem2(nl, grid)
            elif name == "ef_negative":
                verdicts[name] = HypothesisService.check_ef_negative(ef, ivp, grid)
            elif name == "caligo":
                verdicts[name] = HypothesisService.check_caligo(ef, grid)
            elif name == "comparisons":
                verdicts[name] = HypothesisService.check_comparisons(ef, ivp.t0, grid=grid)
        return verdicts

    @staticmethod
    def summarize(traj: Trajectory) -> TrajectorySummary:
        i = len(traj) - 1
        return TrajectorySummary(
            termination=traj.termination,
            samples=len(traj),
            accepted_steps=traj.accepted,
            rejected_steps=traj.rejected,
            evaluations=traj.evaluations,
            t_first=float(traj.t[0]),
            t_last=traj.t_last,
            final={
                "t": float(traj.t[i]),
                "x": float(traj.x[i]),
                "xp": float(traj.xp[i]),
                "u": float(traj.u[i]),
                "v": float(traj.v[i]),
            },
            max_abs_u=float(np.max(np.abs(traj.u))),
            sign_changes=HypothesisService.count_sign_changes(traj),
        )

    @staticmethod
    def integrate(scenario: Scenario) -> Tuple[Nonlinearity, IvpSpec, Trajectory]:
        nl, _ = ScenarioService.build_problem(scenario)
        ivp = ScenarioService.ivp(scenario)
        traj = IntegratorService.integrate(nl, ivp, ScenarioService.integration_config(scenario))
        return nl, ivp, traj

    @staticmethod
    def run(scenario: Scenario) -> RunReport:
        return ScenarioService.run_with_trajectory(scenario)[0]

    @staticmethod
    def run_with_trajectory(scenario: Scenario) -> Tuple[RunReport, Optional[Trajectory]]:
        """Checks, integration, monitors, estimate and classification for one scenario.

        Stage failures are recorded in ``errors`` and the remaining stages still run.
        """
        traj = None
        timings: Dict[str, float] = {}
        nl, ef = ScenarioService.build_problem(scenario)
        ivp = ScenarioService.ivp(scenario)
        u0, v0, c = ProblemService.derived_constants(ivp)
        report = RunReport(
            scenario=scenario.model_dump(mode="json", by_alias=True),
            derived={"u0": u0, "v0": v0, "c": c},
        )
        logger.info("scenario %s: start", scenario.name)

        def stage(name: str, fn: Callable[[], object]) -> Optional[object]:
            start = time.perf_counter()
            try:
                return fn()
            except ObliqueError as e:
                report.errors.append(f"{name}: {e.detail}")
                logger.warning("scenario %s: %s failed: %s", scenario.name, name, e.detail)
                return None
            finally:
                timings[name] = time.perf_counter() - start

        if scenario.checks:
            report.verdicts = stage("checks", lambda: ScenarioService.checks(scenario, nl, ef, ivp)) or {}

        if scenario.integrate:
            cfg = ScenarioService.integration_config(scenario)
            traj = stage("integrate", lambda: IntegratorService.integrate(nl, ivp, cfg))
            if traj is not None:
                report.trajectory = ScenarioService.summarize(traj)
                if traj.termination.kind == "evaluation_error":
                    report.errors.append(f"integrate: {traj.termination.message}")
                if "v1" in scenario.monitors:
                    mon = stage("v1", lambda: LyapunovService.monitor_v1(nl, ivp, traj))
                    if mon is not None:
                        report.lyapunov["V1"] = mon
                if "v2" in scenario.monitors:
                    mon = stage("v2", lambda: LyapunovService.monitor_v2(nl, traj))
                    if mon is not None:
                        report.lyapunov["V2"] = mon
                if "bound_chain" in scenario.monitors:
                    report.bound_chain = stage("bound_chain", lambda: LyapunovService.bound_chain(nl, ivp, traj))
                if traj.termination.kind == "reached_horizon":
                    report.estimate = stage(
                        "estimate",
                        lambda: AsymptoteService.estimate(
                            traj, scenario.classification.window, scenario.classification
                        ),
                    )
                report.classification = AsymptoteService.classify(
                    traj, report.estimate, scenario.classification
                )
                logger.info("scenario %s: %s", scenario.name, report.classification.kind)

        report.timings = timings
        return report, traj

    @staticmethod
    def sweep_point(scenario: Scenario, x0: float, xp0: float) -> SweepPoint:
        """Classify one (x0, xp0); errors are recorded on the point."""
        try:
            nl, _ = ScenarioService.build_problem(scenario)
            ivp = IvpSpec(t0=scenario.ivp.t0, x0=x0, xp0=xp0)
            traj = IntegratorService.integrate(nl, ivp, ScenarioService.integration_config(scenario))
            est = None
            if traj.termination.kind == "reached_horizon":
                est = AsymptoteService.estimate(traj, scenario.classification.window, scenario.classification)
            cls = AsymptoteService.classify(traj, est, scenario.classification)
            margin = None
            if nl.has_envelope:
                margin = HypothesisService.threshold_10(nl, ivp).computed.get("margin")
            return SweepPoint(x0=x0, xp0=xp0, classification=cls, threshold_margin=margin)
        except ObliqueError as e:
            return SweepPoint(x0=x0, xp0=xp0, error=e.detail)
        except Exception as e:
            return SweepPoint(x0=x0, xp0=xp0, error=f"Failed to run sweep point: {str(e)}")

    @staticmethod
    def sweep(
        scenario: Scenario,
        x0: Range,
        xp0: Range,
        workers: Optional[int] = None,
        progress: bool = False,
    ) -> SweepReport:
        workers = workers or settings.SWEEP_WORKERS
        points = [
            (float(a), float(b))
            for a in np.linspace(x0.lo, x0.hi, x0.count)
            for b in np.linspace(xp0.lo, xp0.hi, xp0.count)
        ]
        scenarios = [scenario] * len(points)
        xs = [p[0] for p in points]
        xps = [p[1] for p in points]
        logger.info("sweep %s: %d points on %d worker(s)", scenario.name, len(points), workers)
        if workers == 1:
            results = map(ScenarioService.sweep_point, scenarios, xs, xps)
            results = list(tqdm(results, total=len(points), disable=not progress))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = pool.map(ScenarioService.sweep_point, scenarios, xs, xps, chunksize=8)
                results = list(tqdm(results, total=len(points), disable=not progress))
        results.sort(key=lambda p: (p.x0, p.xp0))
        counts: Dict[str, int] = {}
        for p in results:
            key = p.classification.kind if p.classification else "error"
            counts[key] = counts.get(key, 0) + 1
        return SweepReport(scenario=scenario.name, points=results, counts=dict(sorted(counts.items())))
