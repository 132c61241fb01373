import math

import numpy as np
import pytest

from oblique.core.errors import EvaluationError
from oblique.utils.quadrature import gauss_kronrod, integrate_finite, integrate_tail


def test_single_panel_is_exact_for_polynomials():
    value, err = gauss_kronrod(lambda s: s**5 - 3 * s**2, 0.0, 1.0)
    assert value == pytest.approx(1.0 / 6.0 - 1.0, abs=1e-15)
    assert err < 1e-12


def test_finite_integral():
    res = integrate_finite(math.sin, 0.0, math.pi)
    assert res.converged
    assert res.value == pytest.approx(2.0, abs=1e-10)
    assert res.abs_error_estimate <= 1e-8 * 2.0


def test_reversed_and_empty_intervals():
    forward = integrate_finite(math.exp, 0.0, 1.0)
    backward = integrate_finite(math.exp, 1.0, 0.0)
    assert backward.value == -forward.value
    assert integrate_finite(math.exp, 2.0, 2.0).value == 0.0


def test_endpoint_singularity_subdivides():
    res = integrate_finite(math.sqrt, 0.0, 1.0)
    assert res.converged
    assert res.evaluations > 15
    assert res.value == pytest.approx(2.0 / 3.0, rel=1e-8)


def test_panel_budget_reports_non_convergence():
    res = integrate_finite(lambda s: math.sin(50.0 * s), 0.0, 10.0, rel_tol=1e-14, abs_tol=1e-16, max_panels=2)
    assert not res.converged


def test_non_finite_integrand_raises():
    with pytest.raises(EvaluationError):
        integrate_finite(lambda s: math.inf, 0.0, 1.0)


@pytest.mark.parametrize(
    "h,lo,exact",
    [
        (lambda t: t**-2, 100.0, 0.01),
        (lambda xi: xi**-3, 1.5, 2.0 / 9.0),
        (lambda xi: xi**-3, 1.0, 0.5),
        (lambda t: t**-1.5, 1.0, 2.0),
        (lambda t: math.exp(-t), 1.0, math.exp(-1.0)),
    ],
)
def test_convergent_tails(h, lo, exact):
    tail = integrate_tail(h, lo)
    assert tail.convergent
    assert tail.value == pytest.approx(exact, abs=1e-8)
    assert len(tail.horizons) == len(tail.evidence)


def test_power_law_tail_is_extrapolated():
    tail = integrate_tail(lambda t: t**-2, 100.0)
    assert tail.extrapolated
    assert len(tail.horizons) < 10


@pytest.mark.parametrize("h", [lambda t: 1.0 / t, lambda t: 1.0, lambda t: t])
def test_divergent_tails(h):
    tail = integrate_tail(h, 1.0)
    assert tail.kind == "divergent"
    assert not tail.convergent
    assert np.all(np.diff(tail.evidence) > 0.0)


def test_short_schedule_is_inconclusive():
    tail = integrate_tail(lambda t: t**-1.05, 1.0, max_doublings=5)
    assert tail.kind == "inconclusive"
    assert tail.horizons == [2.0, 4.0, 8.0, 16.0, 32.0]
