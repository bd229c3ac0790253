import dataclasses
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import pandas as pd

from src.errors import KellerOssermanError
from src.nonlinearity.antiderivative import antiderivative_G
from src.nonlinearity.conditions import keller_osserman
from src.nonlinearity.nonlinearity import F_CEILING
from src.nonlinearity.profile import leading_profile
from src.nonlinearity.tail import TailFamily
from src.numerics.quadrature import integrate_tail
from src.picard.fixed_point import fixed_point

logger = logging.getLogger(__name__)

# sampled-verdict thresholds
TOWARD_ZERO = 0.1
BOUNDED_BELOW = 0.5
MIN_DECADES = 2.0


class Universality(Enum):
    UNIVERSAL = "Universal"
    NON_UNIVERSAL = "NonUniversal"
    INCONCLUSIVE = "Inconclusive"

    @property
    def exit_code(self):
        return {Universality.UNIVERSAL: 0, Universality.NON_UNIVERSAL: 2, Universality.INCONCLUSIVE: 3}[self]


@dataclass(frozen=True, eq=False)
class UniversalityReport:
    """
    Verdict on the universality of the blow-up rate.

    Attributes:
        samples (pd.DataFrame): Columns u, phi.
        verdict (Universality): The closed-form verdict when the tail model has one, else the sampled verdict.
        sampled_verdict (Universality): Verdict of the sampled criterion alone.
        closed_form_verdict (Universality): Verdict from the tail model, None for NumericOnly.
        tail_limit (float): Closed-form limit of phi, nan when unknown.
        gap_table (pd.DataFrame): Optional second-term gaps.
        detail (str): One-line diagnosis.
    """

    samples: pd.DataFrame
    verdict: Universality
    sampled_verdict: Universality
    closed_form_verdict: Universality = None
    tail_limit: float = math.nan
    gap_table: pd.DataFrame = None
    detail: str = ""


def default_lower_limit(nl):
    return max(nl.a, 0.0)


def phi(nl, u, lower_limit=None):
    """
    phi(u) = sqrt(2F(u)) * int_u^inf G(t) / (2F(t))**1.5 dt.

    Args:
        nl (Nonlinearity): The nonlinearity.
        u (float): Evaluation point.
        lower_limit (float): Lower limit of G, defaults to max(a, 0).

    Returns:
        float: phi(u), inf when the outer integral diverges.
    """
    lower = default_lower_limit(nl) if lower_limit is None else float(lower_limit)
    G = antiderivative_G(nl, lower)

    def integrand(t):
        return G(t) / (2.0 * np.asarray(nl.F(t), dtype=float)) ** 1.5

    descriptor = nl.descriptor("G_over_2F_32")
    if lower != nl.a and descriptor.amplitude is not None:
        descriptor = dataclasses.replace(descriptor, amplitude=None)
    tail = integrate_tail(integrand, float(u), descriptor, nl.spec)
    if math.isinf(tail):
        return math.inf
    return math.sqrt(2.0 * float(nl.F(u))) * tail


def phi_power_closed_form(c, s, u):
    """phi for F = c u**s exactly: (2c)**(-1/2) * 2 u**(2 - s/2) / ((s + 2)(s - 2))."""
    return (2.0 * c) ** -0.5 * 2.0 * u ** (2.0 - s / 2.0) / ((s + 2.0) * (s - 2.0))


def closed_form_limit(nl):
    """
    Limit of phi from the tail model.

    Returns:
        tuple: (Universality or None, limit); None and nan for NumericOnly tails.
    """
    tail = nl.tail
    if tail.kind is TailFamily.POWER_LAW:
        s = tail.exponent_or_rate
        if s > 4.0:
            return Universality.UNIVERSAL, 0.0
        if s == 4.0:
            return Universality.NON_UNIVERSAL, phi_power_closed_form(tail.amplitude, s, 1.0)
        return Universality.NON_UNIVERSAL, math.inf
    if tail.kind is TailFamily.EXPONENTIAL:
        return Universality.UNIVERSAL, 0.0
    if tail.kind is TailFamily.CONSTANT:
        return Universality.NON_UNIVERSAL, math.inf
    return None, math.nan


def sample_phi(nl, u_start=None, max_doublings=400, ceiling=F_CEILING, lower_limit=None):
    """
    phi at u = u_start * 2**j until F exceeds `ceiling` or j reaches max_doublings.

    Returns:
        pd.DataFrame: Columns u, phi.
    """
    u = max(nl.a + 1.0, 1.0) if u_start is None else float(u_start)
    rows = []
    for _ in range(max_doublings + 1):
        if u > nl.ceiling or not float(nl.F(u)) <= ceiling:
            break
        rows.append({"u": u, "phi": phi(nl, u, lower_limit)})
        u *= 2.0
    return pd.DataFrame(rows, columns=["u", "phi"])


def sampled_verdict(samples):
    """
    Applies the sampled criterion to phi samples.

    Universal: over at least two decades of u the last sample is below
    TOWARD_ZERO times the first and phi decreases on the final decade.
    NonUniversal: the minimum over the final decade exceeds BOUNDED_BELOW
    times the median (or phi is infinite).
    """
    u, values = samples["u"].to_numpy(), samples["phi"].to_numpy()
    if values.size < 3:
        return Universality.INCONCLUSIVE
    if np.any(np.isinf(values)):
        return Universality.NON_UNIVERSAL
    final = u >= u[-1] / 10.0
    decades = math.log10(u[-1] / u[0])
    toward_zero = (decades >= MIN_DECADES and values[-1] < TOWARD_ZERO * values[0]
                   and bool(np.all(np.diff(values[final]) < 0)))
    bounded = float(np.min(values[final])) > BOUNDED_BELOW * float(np.median(values))
    if toward_zero and not bounded:
        return Universality.UNIVERSAL
    if bounded and not toward_zero:
        return Universality.NON_UNIVERSAL
    return Universality.INCONCLUSIVE


def _eventually_monotone(values):
    steps = np.sign(np.diff(values[len(values) // 2:]))
    steps = steps[steps != 0]
    return steps.size == 0 or bool(np.all(steps == steps[0]))


def classify(nl, u_start=None, max_doublings=400, ceiling=F_CEILING, lower_limit=None):
    """
    Decides whether the boundary blow-up rate of nl is universal.

    Args:
        nl (Nonlinearity): The nonlinearity (Keller-Osserman must hold).
        u_start (float): First sample point, defaults to max(a + 1, 1).
        max_doublings (int): Largest j in u = u_start * 2**j.
        ceiling (float): Sampling stops once F exceeds this.
        lower_limit (float): Lower limit of G.

    Returns:
        UniversalityReport: Samples and verdicts.

    Raises:
        KellerOssermanError: The Keller-Osserman condition does not hold.
    """
    report = keller_osserman(nl)
    if not report.holds:
        raise KellerOssermanError(f"Keller-Osserman condition {report.verdict.value} for {nl.label}")
    samples = sample_phi(nl, u_start, max_doublings, ceiling, lower_limit)
    sampled = sampled_verdict(samples)
    closed, limit = closed_form_limit(nl)
    finite = samples["phi"].to_numpy()
    finite = finite[np.isfinite(finite)]
    if finite.size > 3 and not _eventually_monotone(finite):
        logger.warning(f"phi samples for {nl.label} are not eventually monotone; quadrature may be unreliable")
    if closed is None:
        verdict = sampled
        detail = f"sampled phi over {len(samples)} points: {sampled.value}"
    else:
        verdict = closed
        detail = f"closed-form limit {limit:.6g}: {closed.value}"
        if sampled is not closed:
            detail += f"; sampled phi over {len(samples)} points reads {sampled.value}"
            logger.warning(f"{nl.label}: sampled verdict {sampled.value} disagrees with closed form {closed.value}")
    logger.info(f"universality of {nl.label}: {verdict.value} (phi limit {limit:.6g})")
    return UniversalityReport(samples, verdict, sampled, closed, limit, None, detail)


def phi_along_profile(nl, N, k, distances, result=None, lower_limit=None):
    """
    phi evaluated along u0(r) (k = 0) or u1(r) (k = 1).

    Args:
        nl (Nonlinearity): The nonlinearity.
        N (int): Dimension.
        k (int): 0 or 1.
        distances (array-like): Distances d = 1 - r.
        result (PicardResult): Iterates, needed for k = 1 (computed when omitted).
        lower_limit (float): Lower limit of G.

    Returns:
        pd.DataFrame: Columns d, u_k, phi.
    """
    if k not in (0, 1):
        raise ValueError(f"phi is tracked along u0 or u1, got k={k}")
    if k == 1 and result is None:
        result = fixed_point(nl, N)
    rows = []
    for d in distances:
        if k == 0:
            uk = leading_profile(nl, float(d))
        else:
            uk = result.iterate(1).u_at_distance(float(d))
        rows.append({"d": float(d), "u_k": uk, "phi": phi(nl, uk, lower_limit)})
    return pd.DataFrame(rows, columns=["d", "u_k", "phi"])
