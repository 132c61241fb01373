import numpy as np


def log_decimate(t: np.ndarray, max_points: int) -> np.ndarray:
    """Indices of at most ``max_points`` samples, evenly spread in log t.

    The first and last samples are always kept.
    """
    n = len(t)
    if n <= max_points:
        return np.arange(n)
    targets = np.geomspace(t[0], t[-1], max_points)
    idx = np.searchsorted(t, targets).clip(0, n - 1)
    idx[0], idx[-1] = 0, n - 1
    return np.unique(idx)


def log_spaced(lo: float, hi: float, count: int) -> np.ndarray:
    points = np.geomspace(lo, hi, count)
    points[0], points[-1] = lo, hi
    return points


def format_float(value: float) -> str:
    """Shortest round-tripping text for a float."""
    return repr(float(value))
