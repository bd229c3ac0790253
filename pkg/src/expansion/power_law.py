import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from src.expansion.puiseux import PuiseuxSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LatticeCollision:
    """
    A relative index at which a free constant meets the coefficient lattice.

    Attributes:
        index (int): Lattice index k of the term d**(k - m).
        exponent (float): Its d-exponent, k - m.
    """

    index: int
    exponent: float


@dataclass(frozen=True, eq=False)
class PowerLawExpansion:
    """
    Boundary expansion u(d) = d**(-m) * sum_k a_k d**k for f(u) = u**p.

    Attributes:
        p (float): Exponent of f, p > 1.
        N (int): Dimension.
        m (float): 2 / (p - 1).
        coefficients (np.ndarray): a_0, a_1, ... in the F = u**(p+1)/(p+1) normalisation.
        scale (float): Factor q**(1/(p-1)) converting the coefficients of
            f = q u**p (F = u**(2q)/2, p = 2q - 1) to those of f = u**p.
        obstruction (float): Relative index 2 + 2m of the first undetermined term.
        collisions (tuple): LatticeCollision records (integer obstruction only).
        reversion_error (float): Largest coefficient of R(x(d)) - d, with R the distance series in
            x and x(d) its reversion.
    """

    p: float
    N: int
    m: float
    coefficients: np.ndarray
    scale: float
    obstruction: float
    collisions: tuple = ()
    reversion_error: float = 0.0

    @property
    def K(self):
        """Index of the last singular term."""
        return singular_term_count(self.p) - 1

    @property
    def exponents(self):
        return np.arange(len(self.coefficients)) - self.m

    def series(self):
        return PuiseuxSeries(-self.m, 1.0, self.coefficients, "d")

    def evaluate(self, d, terms=None):
        """Partial sum of the first `terms` coefficients at distance d."""
        terms = len(self.coefficients) if terms is None else terms
        return self.series().truncated(terms).evaluate(d)

    def to_frame(self):
        """Coefficients with columns p, N, k, exponent, a_k."""
        k = np.arange(len(self.coefficients))
        return pd.DataFrame({"p": self.p, "N": self.N, "k": k, "exponent": self.exponents, "a_k": self.coefficients})


def singular_term_count(p):
    """Number of terms with non-positive d-exponent, floor(2/(p-1)) + 1."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    return math.floor(2.0 / (p - 1.0) + 1e-12) + 1


def leading_coefficient(p):
    """a_0 = (2(p+1)/(p-1)**2)**(1/(p-1))."""
    return (2.0 * (p + 1.0) / (p - 1.0) ** 2) ** (1.0 / (p - 1.0))


def collisions(p):
    """Lattice collisions of the recursion for f = u**p."""
    m = 2.0 / (p - 1.0)
    obstruction = 2.0 + 2.0 * m
    if abs(obstruction - round(obstruction)) < 1e-9:
        k = int(round(obstruction))
        return (LatticeCollision(k, k - m),)
    return ()


def power_law_expansion(p, N, order=None):
    """
    Coefficients of the boundary expansion of the large solution for f(u) = u**p.

    Works in the normalisation F = u**(2q)/2 with X = 1/u and runs the
    Picard recursion on series: starting from v = X**(-q), each sweep forms
    the distance R = int_u^inf dt/v, the radius 1 - R, the error term
    (N-1) int^u v/(1 - R) and v = X**(-q) sqrt(1 - 2(N-1) X**(2q) int^u v/(1 - R)).
    The distance of the final v is reverted to u(d) and rescaled to f = u**p.

    Args:
        p (float): Exponent, p > 1.
        N (int): Dimension.
        order (int): Highest coefficient index wanted; defaults to the last
            singular index floor(2/(p-1)).

    Returns:
        PowerLawExpansion: The coefficients a_0, ..., a_order (fewer when the
        lattice obstruction at 2 + 2m comes first).
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if N < 1:
        raise ValueError(f"dimension must be positive, got {N}")
    q = (p + 1.0) / 2.0
    m = 2.0 / (p - 1.0)
    obstruction = 2.0 + 2.0 * m
    length = math.ceil(obstruction - 1e-9)
    wanted = singular_term_count(p) if order is None else int(order) + 1
    found = collisions(p)
    for collision in found:
        logger.warning(f"LatticeCollision for p={p:g}: free constant and logarithm at index {collision.index} "
                       f"(d-exponent {collision.exponent:.6g}); expansion truncated below it")
    if wanted > length:
        logger.warning(f"p={p:g}: only {length} coefficients precede the obstruction at index {obstruction:.6g}, "
                       f"{wanted} requested")
        wanted = length

    step = q - 1.0
    v = PuiseuxSeries.monomial(-q, length, step, variable="X")
    for sweep in range(length + 1):
        radius = 1.0 - v.reciprocal().tail_integral()
        integrand = (v * radius.reciprocal()).truncated(length - 1)
        radicand = 1.0 - 2.0 * (N - 1) * integrand.antiderivative().shift(2.0 * q)
        following = radicand.sqrt().shift(-q).truncated(length)
        change = float(np.max(np.abs(following.coeffs - v.coeffs)))
        v = following
        logger.debug(f"p={p:g}, N={N}: sweep {sweep}, coefficient change {change:.3e}")
        if change == 0.0 and sweep > 0:
            break

    distance = v.reciprocal().tail_integral().relabel(1.0, 1.0, "x")
    x_of_d = distance.revert()
    identity = distance.compose(x_of_d) - PuiseuxSeries.monomial(1.0, len(x_of_d), variable="d")
    reversion_error = float(np.max(np.abs(identity.coeffs)))
    if reversion_error > 1e-8:
        logger.warning(f"p={p:g}, N={N}: reverted distance reproduces d only to {reversion_error:.3e}")
    profile = x_of_d.power(-m)
    scale = q ** (1.0 / (p - 1.0))
    coefficients = scale * profile.coeffs[:wanted]
    logger.info(f"power expansion p={p:g}, N={N}: a_0={coefficients[0]:.12g} "
                f"({len(coefficients)} coefficients, obstruction at {obstruction:.6g})")
    return PowerLawExpansion(float(p), int(N), m, coefficients, scale, obstruction, found, reversion_error)


def residual_series(expansion, extra=3):
    """
    The radial equation u'' - (N-1)/(1-d) u' - u**p evaluated on the truncated expansion.

    The kept coefficients are treated as exact, so the result shows the first
    order at which the truncation is felt.

    Args:
        expansion (PowerLawExpansion): The expansion.
        extra (int): Zero coefficients appended beyond the kept ones.

    Returns:
        PuiseuxSeries: Residual in d, starting at exponent -m - 2.
    """
    kept = len(expansion.coefficients)
    length = kept + extra
    coeffs = np.concatenate([expansion.coefficients, np.zeros(extra)])
    u = PuiseuxSeries(-expansion.m, 1.0, coeffs, "d")
    slope = u.derivative()
    inverse_radius = PuiseuxSeries(0.0, 1.0, np.ones(length), "d")
    return slope.derivative() - (expansion.N - 1) * (inverse_radius * slope) - u.power(expansion.p)


def residual_order(expansion, rtol=1e-9, extra=3):
    """
    Leading d-exponent of the residual, ignoring coefficients below rtol times the largest term of u''.

    Returns:
        float: The exponent, or +inf when every stored residual coefficient vanishes.
    """
    residual = residual_series(expansion, extra)
    u = PuiseuxSeries(-expansion.m, 1.0, expansion.coefficients, "d")
    scale = float(np.max(np.abs(u.derivative().derivative().coeffs)))
    significant = np.flatnonzero(np.abs(residual.coeffs) > rtol * scale)
    if significant.size == 0:
        return math.inf
    return float(residual.exponents[significant[0]])
