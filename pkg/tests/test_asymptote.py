import pytest

from oblique.core.errors import PreconditionError
from oblique.schemas.integration import IntegrationConfig
from oblique.schemas.problem import EmdenFowlerCoeff, IvpSpec
from oblique.schemas.reports import ClassificationThresholds
from oblique.services.asymptote_service import AsymptoteService
from oblique.services.integrator_service import IntegratorService
from oblique.services.problem_service import ProblemService


PRECISE = dict(rel_tol=1e-11, abs_tol=1e-14)


def test_line_is_asymptotically_linear(free_motion):
    traj = IntegratorService.integrate(free_motion, IvpSpec(t0=1.0, x0=1.0, xp0=2.0), IntegrationConfig(t_end=1e4, **PRECISE))
    est = AsymptoteService.estimate(traj)
    assert est.converged
    assert est.u_limit.value == 1.0 and est.u_limit.spread == 0.0
    assert est.x1.value == pytest.approx(2.0, abs=1e-9)
    assert est.x2.value == -1.0
    assert est.x1_from_v.value == pytest.approx(2.0, abs=1e-3)
    assert est.t_window == (5e3, 1e4)
    assert est.window == 16
    cls = AsymptoteService.classify(traj, est)
    assert cls.kind == "AsymptoticallyLinear"
    assert cls.x1 == pytest.approx(2.0, abs=1e-9)
    assert cls.x2 == -1.0


def test_constant_is_sublinear(free_motion):
    traj = IntegratorService.integrate(free_motion, IvpSpec(t0=1.0, x0=1.0, xp0=0.0), IntegrationConfig(t_end=1e4, **PRECISE))
    est = AsymptoteService.estimate(traj)
    cls = AsymptoteService.classify(traj, est)
    assert cls.kind == "Sublinear"
    assert cls.x1 is None
    assert est.u_limit.value == -1.0


def test_demo_settles_on_a_line(demo_nl, demo_ivp):
    traj = IntegratorService.integrate(demo_nl, demo_ivp, IntegrationConfig(t_end=1e6, rel_tol=1e-10))
    est = AsymptoteService.estimate(traj)
    cls = AsymptoteService.classify(traj, est)
    assert cls.kind == "AsymptoticallyLinear"
    assert cls.x1 == pytest.approx(0.5000063, abs=1e-6)
    assert est.u_limit.value == pytest.approx(1.25e-3, rel=1e-2)
    assert est.consistency_residual <= 1e-5


def test_blowup_classification(blowup_nl):
    traj = IntegratorService.integrate(blowup_nl, IvpSpec(t0=1.0, x0=1.0, xp0=1.0), IntegrationConfig(t_end=10.0))
    with pytest.raises(PreconditionError):
        AsymptoteService.estimate(traj)
    cls = AsymptoteService.classify(traj, None)
    assert cls.kind == "Blowup"
    assert cls.t_inf_estimate == pytest.approx(2.0, abs=1e-3)


def test_quadratic_growth_is_unbounded():
    nl = ProblemService.to_nonlinearity(EmdenFowlerCoeff(n=2, A=lambda t: -2.0 * t**-6))
    traj = IntegratorService.integrate(nl, IvpSpec(t0=1.0, x0=1.0, xp0=2.0), IntegrationConfig(t_end=100.0, rel_tol=1e-10))
    assert AsymptoteService.u_growth(traj) >= 100.0 * (1 - 1e-6)
    cls = AsymptoteService.classify(traj, None)
    assert cls.kind == "Unbounded"
    assert cls.diagnostics["u_growth"] > 10.0


def test_unfinished_run_is_undetermined(free_motion):
    traj = IntegratorService.integrate(free_motion, IvpSpec(t0=1.0, x0=1.0, xp0=2.0), IntegrationConfig(t_end=1e6, max_steps=5))
    cls = AsymptoteService.classify(traj, None)
    assert cls.kind == "Undetermined"
    assert "step_budget_exhausted" in cls.reason


def test_unsettled_limits_are_undetermined(demo_nl, demo_ivp):
    traj = IntegratorService.integrate(demo_nl, demo_ivp, IntegrationConfig(t_end=1e4, rel_tol=1e-10))
    strict = ClassificationThresholds(limit_rel_tol=1e-300)
    est = AsymptoteService.estimate(traj, thresholds=strict)
    assert not est.converged
    assert AsymptoteService.classify(traj, est, strict).kind == "Undetermined"
