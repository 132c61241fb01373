import math

import pytest

from oblique.core.errors import PreconditionError
from oblique.schemas.integration import IntegrationConfig
from oblique.schemas.problem import EmdenFowlerCoeff, IvpSpec
from oblique.schemas.states import UvState
from oblique.services.integrator_service import IntegratorService
from oblique.services.lyapunov_service import LyapunovService
from oblique.services.problem_service import ProblemService


CALIGO_IVP = IvpSpec(t0=1.0, x0=0.3, xp0=0.5)


def test_v1_starts_at_half_u_squared(demo_nl):
    s = UvState(t=100.0, u=-50.0, v=0.5)
    assert LyapunovService.v1(demo_nl, 100.0, s).value == 1250.0
    with pytest.raises(PreconditionError):
        LyapunovService.v1(demo_nl, 200.0, s)


def test_v2_for_the_caligo_instance(caligo_ef):
    nl = ProblemService.to_nonlinearity(caligo_ef)
    sample = LyapunovService.v2(nl, UvState(t=CALIGO_IVP.t0, u=CALIGO_IVP.u0, v=CALIGO_IVP.v0))
    assert sample.value == pytest.approx(0.065, rel=1e-12)
    negative = LyapunovService.v2(nl, UvState(t=2.0, u=0.0, v=-0.4))
    assert negative.value == pytest.approx(0.08, rel=1e-12)


def test_v2_is_conserved_on_the_caligo_instance(caligo_ef):
    nl = ProblemService.to_nonlinearity(caligo_ef)
    cfg = IntegrationConfig(t_end=1e4, rel_tol=1e-11, abs_tol=1e-14)
    traj = IntegratorService.integrate(nl, CALIGO_IVP, cfg)
    report = LyapunovService.monitor_v2(nl, traj)
    assert report.function == "V2"
    assert report.passed
    assert report.drift <= report.total_slack
    assert report.u_bound == pytest.approx(math.sqrt(0.13))
    assert report.u_bound_passed


def test_v1_is_nonincreasing_for_the_demo(demo_nl, demo_ivp):
    traj = IntegratorService.integrate(demo_nl, demo_ivp, IntegrationConfig(t_end=1e5, rel_tol=1e-10))
    report = LyapunovService.monitor_v1(demo_nl, demo_ivp, traj)
    assert report.passed
    assert report.violations == []
    assert 2 <= report.samples <= len(traj)


def test_constant_lyapunov_for_free_motion(free_motion):
    ivp = IvpSpec(t0=1.0, x0=1.0, xp0=2.0)
    traj = IntegratorService.integrate(free_motion, ivp, IntegrationConfig(t_end=100.0))
    v1 = LyapunovService.monitor_v1(free_motion, ivp, traj)
    v2 = LyapunovService.monitor_v2(free_motion, traj)
    assert v1.passed and v2.passed
    assert v1.drift == 0.0 and v2.drift == 0.0
    assert v1.max_increase == 0.0


def test_bound_chain_for_the_demo(demo_nl, demo_ivp):
    traj = IntegratorService.integrate(demo_nl, demo_ivp, IntegrationConfig(t_end=1e5, rel_tol=1e-10))
    report = LyapunovService.bound_chain(demo_nl, demo_ivp, traj)
    assert report.K == pytest.approx(0.01, abs=1e-10)
    assert report.c == 1.0
    assert report.passed and report.y_bound_passed
    assert report.max_ratio < 1e-3
    assert report.wintner_passed
    assert all(s.abs_u < s.bound_4yc for s in report.samples)


def test_bound_chain_needs_an_envelope(free_motion):
    ivp = IvpSpec(t0=1.0, x0=1.0, xp0=2.0)
    traj = IntegratorService.integrate(free_motion, ivp, IntegrationConfig(t_end=10.0))
    with pytest.raises(PreconditionError):
        LyapunovService.bound_chain(free_motion, ivp, traj)


def test_v1_increases_when_the_sign_is_flipped():
    ef = EmdenFowlerCoeff(n=2, A=lambda t: t**-6, dA_dt=lambda t: -6.0 * t**-7)
    nl = ProblemService.to_nonlinearity(ef)
    ivp = IvpSpec(t0=100.0, x0=50.0, xp0=0.0)
    traj = IntegratorService.integrate(nl, ivp, IntegrationConfig(t_end=1e4, rel_tol=1e-10))
    report = LyapunovService.monitor_v1(nl, ivp, traj)
    assert not report.passed
    assert report.violations
    assert report.max_increase > 0.0
    assert all(v.increase > v.allowed_slack for v in report.violations)


def test_v2_decreases_under_strict_caligo():
    ef = EmdenFowlerCoeff(n=1, A=lambda t: t**-4.5, dA_dt=lambda t: -4.5 * t**-5.5)
    nl = ProblemService.to_nonlinearity(ef)
    cfg = IntegrationConfig(t_end=1e4, rel_tol=1e-11, abs_tol=1e-14)
    traj = IntegratorService.integrate(nl, CALIGO_IVP, cfg)
    report = LyapunovService.monitor_v2(nl, traj)
    assert report.passed
    assert report.u_bound_passed
    start = LyapunovService.v2(nl, traj.state(0)).value
    end = LyapunovService.v2(nl, traj.state(len(traj) - 1)).value
    assert start == pytest.approx(0.065, rel=1e-12)
    assert end < start - 5e-3


def test_v2_partials_are_only_computed_on_request(caligo_ef):
    nl = ProblemService.to_nonlinearity(caligo_ef)
    s = UvState(t=2.0, u=0.3, v=0.4)
    sample, du, dv = LyapunovService._v2(nl, s, None)
    assert (du, dv) == (0.3, 0.0)
    _, du, dv = LyapunovService._v2(nl, s, None, partials=True)
    assert du == 0.3
    assert dv == pytest.approx(8.0 * nl.f(2.0, 0.4), rel=1e-15)
    assert sample.value == LyapunovService.v2(nl, s).value
