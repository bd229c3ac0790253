import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.nonlinearity.nonlinearity import F_CEILING
from src.nonlinearity.tail import TailFamily
from src.numerics.quadrature import CumulativeIntegral, integrate_tail

logger = logging.getLogger(__name__)

# fitted decay exponents of the integrand on either side of 1
HOLDS_ABOVE = 1.1
FAILS_BELOW = 0.9


class Verdict(Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"

    @property
    def exit_code(self):
        return {Verdict.HOLDS: 0, Verdict.FAILS: 2, Verdict.INCONCLUSIVE: 3}[self]


@dataclass(frozen=True)
class ConditionReport:
    """
    Outcome of an integral convergence test.

    Attributes:
        verdict (Verdict): Three-valued outcome.
        tail_integral (float): Value of the tail integral (inf when divergent, nan when unknown).
        lower (float): Lower limit of the tail integral.
        decay (float): Decay exponent of the integrand (closed form or fitted).
        detail (str): One-line diagnosis.
    """

    verdict: Verdict
    tail_integral: float
    lower: float
    decay: float
    detail: str

    @property
    def holds(self):
        return self.verdict is Verdict.HOLDS


def fitted_decay(h, start, stop):
    """
    Log-log decay exponent of h over the last two decades below `stop`.

    Samples u = start * 2^j up to `stop` and fits ln h against ln u by least squares.

    Returns:
        float: e with h(u) ~ u^(-e), or nan when fewer than 3 usable samples exist.
    """
    points = start * 2.0 ** np.arange(0, 2000)
    points = points[points <= stop]
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        values = np.asarray(h(points), dtype=float)
    usable = np.isfinite(values) & (values > 0)
    points, values = points[usable], values[usable]
    if points.size == 0:
        return math.nan
    window = points >= points[-1] / 100.0
    if np.count_nonzero(window) < 3:
        window = np.ones_like(points, dtype=bool)
    if np.count_nonzero(window) < 3:
        return math.nan
    slope = np.polyfit(np.log(points[window]), np.log(values[window]), 1)[0]
    return float(-slope)


def _numeric_verdict(decay, converges_means_holds):
    if math.isnan(decay) or FAILS_BELOW < decay < HOLDS_ABOVE:
        return Verdict.INCONCLUSIVE
    converges = decay >= HOLDS_ABOVE
    return Verdict.HOLDS if converges == converges_means_holds else Verdict.FAILS


def keller_osserman(nl):
    """
    Decides whether the integral of 1/sqrt(F) converges at infinity.

    Analytic tails are decided in closed form (PowerLaw: s > 2; Exponential:
    always); the finite part is then integrated up to the cutoff and the
    closed-form tail added. NumericOnly tails are decided from the fitted
    decay of 1/sqrt(F) and may come back Inconclusive.

    Args:
        nl (Nonlinearity): The nonlinearity.

    Returns:
        ConditionReport: Verdict and the tail integral from max(cutoff, a + 1).
    """
    lower = max(nl.tail.cutoff, nl.a + 1.0)

    def integrand(t):
        with np.errstate(divide="ignore"):
            return 1.0 / np.sqrt(nl.F(t))

    tail = nl.tail
    if tail.kind is TailFamily.POWER_LAW:
        decay = tail.exponent_or_rate / 2.0
        if decay <= 1.0:
            return ConditionReport(Verdict.FAILS, math.inf, lower, decay, f"F ~ u^{tail.exponent_or_rate:g}, s <= 2")
        value = integrate_tail(integrand, lower, nl.descriptor("inv_sqrt_F"), nl.spec)
        return ConditionReport(Verdict.HOLDS, value, lower, decay, f"F ~ u^{tail.exponent_or_rate:g}, s > 2")
    if tail.kind is TailFamily.EXPONENTIAL:
        value = integrate_tail(integrand, lower, nl.descriptor("inv_sqrt_F"), nl.spec)
        return ConditionReport(Verdict.HOLDS, value, lower, math.inf, "F grows exponentially")
    if tail.kind is TailFamily.CONSTANT:
        return ConditionReport(Verdict.FAILS, math.inf, lower, 0.0, "F is bounded")
    decay = fitted_decay(integrand, lower, nl.ceiling)
    verdict = _numeric_verdict(decay, converges_means_holds=True)
    value = math.nan
    if verdict is Verdict.HOLDS:
        value = integrate_tail(integrand, lower, nl.descriptor("inv_sqrt_F"), nl.spec)
    elif verdict is Verdict.FAILS:
        value = math.inf
    logger.info(f"Keller-Osserman for {nl.label}: fitted decay {decay:.4g}, verdict {verdict.value}")
    return ConditionReport(verdict, value, lower, decay, f"fitted decay of 1/sqrt(F) is {decay:.4g}")


def reflected_antiderivative(nl, top=1e8):
    """Tabulated G(t) = int_0^t f(-s) ds."""
    return CumulativeIntegral(lambda t: nl.f(-np.asarray(t, dtype=float)), 0.0, top=top, spec=nl.spec)


def ko2_check(nl, reflected_tail):
    """
    Decides whether the integral of 1/sqrt(G) diverges, G' (t) = f(-t).

    The reflected tail model acts as a comparison function: it is validated
    against the tabulated G beyond its cutoff, then the divergence of the
    model integral decides the verdict.

    Args:
        nl (Nonlinearity): The nonlinearity, evaluable on the negative axis.
        reflected_tail (TailModel): Asymptotic model of G.

    Returns:
        ConditionReport: HOLDS when the integral diverges.
    """
    top = min(reflected_tail.level_crossing(F_CEILING), 1e8 * max(1.0, reflected_tail.cutoff))
    if reflected_tail.kind is TailFamily.CONSTANT:
        top = min(top, reflected_tail.cutoff * 1e3)
    G = reflected_antiderivative(nl, top=top if math.isfinite(top) else 1e8)
    lower = max(reflected_tail.cutoff, 1.0)

    def integrand(t):
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / np.sqrt(G(t))

    if reflected_tail.kind is TailFamily.NUMERIC_ONLY:
        ceiling = _overflow_point(G, lower)
        decay = fitted_decay(integrand, lower, ceiling)
        verdict = _numeric_verdict(decay, converges_means_holds=False)
        logger.info(f"reflected condition for {nl.label}: fitted decay {decay:.4g}, verdict {verdict.value}")
        return ConditionReport(verdict, math.nan, lower, decay, f"fitted decay of 1/sqrt(G) is {decay:.4g}")
    upper = reflected_tail.cutoff + 50.0 / reflected_tail.exponent_or_rate \
        if reflected_tail.kind is TailFamily.EXPONENTIAL else reflected_tail.cutoff * 1e3
    reflected_tail.validate(G, min(upper, top))
    if reflected_tail.kind is TailFamily.EXPONENTIAL:
        descriptor = reflected_tail.descriptor("inv_sqrt_F", top)
        value = integrate_tail(integrand, lower, descriptor, nl.spec)
        return ConditionReport(Verdict.FAILS, value, lower, math.inf, "G grows exponentially")
    if reflected_tail.kind is TailFamily.CONSTANT:
        return ConditionReport(Verdict.HOLDS, math.inf, lower, 0.0, "G is bounded")
    decay = reflected_tail.exponent_or_rate / 2.0
    if decay <= 1.0:
        return ConditionReport(Verdict.HOLDS, math.inf, lower, decay, f"G ~ t^{reflected_tail.exponent_or_rate:g}")
    value = integrate_tail(integrand, lower, reflected_tail.descriptor("inv_sqrt_F", top), nl.spec)
    return ConditionReport(Verdict.FAILS, value, lower, decay, f"G ~ t^{reflected_tail.exponent_or_rate:g}")


def _overflow_point(G, start):
    t = start
    while t < 1e8:
        value = float(G(2 * t))
        if not (math.isfinite(value) and value < F_CEILING):
            break
        t *= 2
    return t
