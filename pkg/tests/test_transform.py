import numpy as np
import pytest

from oblique.schemas.integration import IntegrationConfig
from oblique.schemas.problem import Nonlinearity
from oblique.schemas.states import UvState, XState
from oblique.services.integrator_service import IntegratorService
from oblique.services.transform_service import TransformService


EPS = np.finfo(float).eps


def test_to_uv_and_back():
    s = TransformService.to_uv(XState(t=2.0, x=3.0, xp=4.0))
    assert (s.t, s.u, s.v) == (2.0, 5.0, 1.5)
    back = TransformService.from_uv(s)
    assert (back.x, back.xp) == (3.0, 4.0)


def test_round_trip_within_rounding():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        t = float(10.0 ** rng.uniform(0.0, 6.0))
        s = UvState(t=t, u=float(rng.normal(scale=10.0)), v=float(rng.normal(scale=10.0)))
        back = TransformService.to_uv(TransformService.from_uv(s))
        assert back.t == s.t
        assert abs(back.u - s.u) <= 4 * EPS * (abs(s.u) + abs(t * s.v))
        assert abs(back.v - s.v) <= 4 * EPS * abs(s.v)


def test_lines_have_constant_u():
    rng = np.random.default_rng(1)
    for x1, x2 in rng.normal(size=(50, 2)) * 10.0:
        for t in (1.0, 37.0, 1e5):
            s = TransformService.to_uv(XState(t=t, x=x1 * t + x2, xp=x1))
            assert s.u == pytest.approx(-x2, abs=4 * EPS * (abs(x2) + abs(x1 * t)))


def test_uv_rhs():
    nl = Nonlinearity(f=lambda t, v: v)
    assert TransformService.uv_rhs(nl, UvState(t=2.0, u=1.0, v=3.0)) == (-6.0, 0.25)
    rhs = TransformService.uv_system(nl)
    np.testing.assert_array_equal(rhs(2.0, np.array([1.0, 3.0])), [-6.0, 0.25])


def test_uv_and_x_forms_agree(demo_nl, demo_ivp):
    cfg = IntegrationConfig(t_end=1e3, rel_tol=1e-11, abs_tol=1e-14)
    uv = IntegratorService.advance_system(
        TransformService.uv_system(demo_nl), demo_ivp.t0, (demo_ivp.u0, demo_ivp.v0), 1e3, cfg
    )
    xs = IntegratorService.advance_system(
        TransformService.x_system(demo_nl), demo_ivp.t0, (demo_ivp.x0, demo_ivp.xp0), 1e3, cfg
    )
    u, v = uv.y_last
    x, xp = xs.y_last
    state = TransformService.from_uv(UvState(t=1e3, u=float(u), v=float(v)))
    assert state.x == pytest.approx(x, rel=1e-8)
    assert state.xp == pytest.approx(xp, rel=1e-8)
