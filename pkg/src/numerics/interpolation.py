import numpy as np
from scipy.interpolate import PchipInterpolator


def monotone_interpolant(xs, ys, extrapolate=False):
    """
    C1 shape-preserving piecewise cubic through (xs, ys).

    Args:
        xs (array-like): Strictly increasing abscissae.
        ys (array-like): Monotone (non-strictly) ordinates.
        extrapolate (bool): Evaluate outside [xs[0], xs[-1]] instead of returning nan.

    Returns:
        PchipInterpolator: The evaluator; exact at the nodes.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
        raise ValueError("monotone_interpolant needs two 1-D arrays of equal length >= 2.")
    if not np.all(np.diff(xs) > 0):
        raise ValueError("xs must be strictly increasing.")
    steps = np.diff(ys)
    if not (np.all(steps >= 0) or np.all(steps <= 0)):
        raise ValueError("ys must be monotone.")
    return PchipInterpolator(xs, ys, extrapolate=extrapolate)
