from pathlib import Path

import pytest

from oblique.schemas.integration import IntegrationConfig
from oblique.schemas.problem import EmdenFowlerCoeff, IvpSpec, Nonlinearity
from oblique.services.problem_service import ProblemService


SCENARIO_DIR = Path(__file__).resolve().parent.parent / "oblique" / "scenarios"


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture
def free_motion() -> Nonlinearity:
    return Nonlinearity(
        f=lambda t, v: 0.0,
        df_dv=lambda t, v: 0.0,
        df_dt=lambda t, v: 0.0,
        label="free motion",
    )


@pytest.fixture
def demo_ef() -> EmdenFowlerCoeff:
    """x'' - t^-6 x^3 = 0."""
    return EmdenFowlerCoeff(n=2, A=lambda t: -(t**-6), dA_dt=lambda t: 6.0 * t**-7, label="demo")


@pytest.fixture
def demo_nl(demo_ef) -> Nonlinearity:
    return ProblemService.to_nonlinearity(demo_ef)


@pytest.fixture
def demo_ivp() -> IvpSpec:
    return IvpSpec(t0=100.0, x0=50.0, xp0=0.5)


@pytest.fixture
def caligo_ef() -> EmdenFowlerCoeff:
    """x'' + t^-4 x = 0."""
    return EmdenFowlerCoeff(n=1, A=lambda t: t**-4, dA_dt=lambda t: -4.0 * t**-5, label="caligo")


@pytest.fixture
def blowup_nl() -> Nonlinearity:
    """x'' - 2 x^3 = 0, solved by x = 1/(2 - t)."""
    return ProblemService.to_nonlinearity(EmdenFowlerCoeff(n=2, A=lambda t: -2.0, dA_dt=lambda t: 0.0))


def config(t_end: float, **kw) -> IntegrationConfig:
    return IntegrationConfig(t_end=t_end, **kw)
