import math

import numpy as np

from src.nonlinearity.tail import TailFamily
from src.numerics.quadrature import integrate_tail
from src.numerics.roots import invert_monotone


def leading_distance(nl, u):
    """R0(u) = int_u^inf dt / sqrt(2F(t)), the distance to the boundary of the one-dimensional profile."""
    return integrate_tail(nl.inv_sqrt_2F, float(u), nl.descriptor("inv_sqrt_2F"), nl.spec)


def _initial_guess(nl, d):
    tail = nl.tail
    if tail.kind is TailFamily.POWER_LAW and tail.exponent_or_rate > 2:
        e = tail.exponent_or_rate / 2.0
        amplitude = (2 * tail.amplitude) ** -0.5 / (e - 1.0)
        return max((amplitude / d) ** (1.0 / (e - 1.0)), nl.a + 1e-3)
    if tail.kind is TailFamily.EXPONENTIAL:
        rate = tail.exponent_or_rate / 2.0
        amplitude = (2 * tail.amplitude) ** -0.5 / rate
        return max(math.log(amplitude / d) / rate, nl.a + 1e-3)
    return nl.a + 1.0


def leading_profile(nl, d):
    """
    u0(d): the value solving R0(u0) = d.

    Args:
        nl (Nonlinearity): The nonlinearity (Keller-Osserman must hold).
        d (float): Distance to the boundary, d > 0.

    Returns:
        float: u0(d).
    """
    if not d > 0:
        raise ValueError(f"leading_profile needs d > 0, got {d}")
    guess = _initial_guess(nl, d)
    offset = guess - nl.a

    def log_distance(y):
        return math.log(leading_distance(nl, nl.a + math.exp(y)))

    y = invert_monotone(
        log_distance,
        math.log(d),
        (math.log(offset) - 0.5, math.log(offset) + 0.5),
        tol=1e-10,
        domain=(-700.0, math.log(max(nl.ceiling - nl.a, 1.0))),
    )
    return float(nl.a + np.exp(y))
