import math

import numpy as np
import pytest

from oblique.core.errors import PreconditionError
from oblique.utils.differences import central_diff
from oblique.utils.helpers import log_decimate, log_spaced
from oblique.utils.limits import tail_limit


def test_tail_limit_uses_the_last_window():
    samples = [(1.0, 9.0), (2.0, 2.0), (3.0, 2.5), (4.0, 3.0)]
    value, spread = tail_limit(samples, 2)
    assert value == 2.75
    assert spread == 0.5


@pytest.mark.parametrize(
    "samples,window",
    [
        ([(1.0, 1.0)], 0),
        ([(1.0, 1.0), (2.0, 1.0)], 3),
        ([(1.0, 1.0), (1.0, 2.0)], 2),
        ([(2.0, 1.0), (1.0, 2.0)], 2),
    ],
)
def test_tail_limit_preconditions(samples, window):
    with pytest.raises(PreconditionError):
        tail_limit(samples, window)


def test_central_difference():
    assert central_diff(math.sin, 1.0) == pytest.approx(math.cos(1.0), abs=1e-9)
    assert central_diff(lambda t: t**-6, 100.0) == pytest.approx(-6e-14, rel=1e-8)


def test_log_decimate_keeps_endpoints():
    t = np.linspace(1.0, 1e4, 50_000)
    idx = log_decimate(t, 200)
    assert idx[0] == 0 and idx[-1] == len(t) - 1
    assert len(idx) <= 200
    assert np.all(np.diff(idx) > 0)
    assert np.array_equal(log_decimate(t[:10], 200), np.arange(10))


def test_log_spaced_hits_endpoints_exactly():
    points = log_spaced(3.0, 7.0, 16)
    assert points[0] == 3.0 and points[-1] == 7.0
    assert np.all(np.diff(points) > 0)
