from typing import Sequence, Tuple

import numpy as np

from oblique.core.errors import PreconditionError


def tail_limit(samples: Sequence[Tuple[float, float]], window: int) -> Tuple[float, float]:
    """Limit estimate (mean) and spread (max - min) over the last ``window`` values."""
    if window < 1:
        raise PreconditionError("window must be positive")
    if len(samples) < window:
        raise PreconditionError(
            f"tail_limit needs at least {window} samples, got {len(samples)}"
        )
    data = np.asarray(samples[-window:], dtype=float)
    ts, ys = data[:, 0], data[:, 1]
    if window > 1 and np.any(np.diff(ts) <= 0.0):
        raise PreconditionError("samples must be strictly increasing in t")
    return float(np.mean(ys)), float(np.max(ys) - np.min(ys))
