from typing import Callable

import numpy as np


FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)


def central_diff(h: Callable[[float], float], at: float, scale: float = 1.0) -> float:
    delta = FD_STEP * max(scale, abs(at))
    # exact representable step
    hi, lo = at + delta, at - delta
    return (h(hi) - h(lo)) / (hi - lo)
