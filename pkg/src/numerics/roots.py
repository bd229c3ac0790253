import logging
import math

import numpy as np
from scipy.optimize import brentq

from src.errors import BracketError, NumericalError

logger = logging.getLogger(__name__)


def expand_bracket(h, target, lo, hi, domain=(-math.inf, math.inf), max_expansions=60):
    """
    Widens [lo, hi] geometrically until h - target changes sign.

    Each step moves the end whose residual is smaller in magnitude, doubling
    the bracket width; an end that would cross the domain boundary instead
    halves its distance to it.

    Returns:
        tuple: (lo, hi) straddling the target.

    Raises:
        BracketError: No sign change after `max_expansions` steps.
    """
    dmin, dmax = domain
    flo, fhi = h(lo) - target, h(hi) - target
    for _ in range(max_expansions):
        if flo == 0 or fhi == 0 or np.sign(flo) != np.sign(fhi):
            return lo, hi
        width = hi - lo
        if abs(flo) < abs(fhi):
            lo = lo - width if lo - width > dmin else dmin + 0.5 * (lo - dmin)
            flo = h(lo) - target
        else:
            hi = hi + width if hi + width < dmax else dmax - 0.5 * (dmax - hi)
            fhi = h(hi) - target
        logger.debug(f"bracket expanded to [{lo:.6g}, {hi:.6g}]")
    raise BracketError(f"no sign change for target {target:.6g} around [{lo:.6g}, {hi:.6g}]")


def invert_monotone(h, target, bracket, tol=1e-10, expand=True, domain=(-math.inf, math.inf)):
    """
    Solves h(x) = target for a monotone h.

    Uses Brent's method (bisection safeguarded inverse interpolation) to
    full double precision in x.

    Args:
        h (callable): Monotone scalar function.
        target (float): Value to hit.
        bracket (tuple): Initial (lo, hi).
        tol (float): Acceptable residual |h(x) - target|.
        expand (bool): Try widening the bracket when it does not straddle the target.
        domain (tuple): Hard limits for bracket expansion.

    Returns:
        float: The root.

    Raises:
        BracketError: The target is not straddled (after expansion if enabled).
        NumericalError: The root found misses the target by more than tol.
    """
    lo, hi = bracket
    flo, fhi = h(lo) - target, h(hi) - target
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        if not expand:
            raise BracketError(f"target {target:.6g} not straddled by h on [{lo:.6g}, {hi:.6g}]")
        lo, hi = expand_bracket(h, target, lo, hi, domain)
    x = brentq(lambda t: h(t) - target, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=400)
    residual = abs(h(x) - target)
    if not residual <= tol:
        raise NumericalError(f"inversion residual {residual:.3g} exceeds tol {tol:.3g} at x={x:.17g}")
    return float(x)
