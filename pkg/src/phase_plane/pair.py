import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from src.numerics.quadrature import integrate_finite, integrate_tail
from src.numerics.roots import invert_monotone
from src.phase_plane.shooting import solve_energy_profile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairGapReport:
    """
    Gap between two one-dimensional blow-up profiles of different energy.

    Attributes:
        table (pd.DataFrame): Columns d, u1, u2, gap, bound, ratio, energy_gap.
        constant (float): Median of gap / bound.
        spread (float): max/min - 1 of gap / bound over the table.
        max_energy_gap (float): Largest |F(u1) - F(u2)|.
    """

    table: pd.DataFrame
    constant: float
    spread: float
    max_energy_gap: float


def _energy_gap(nl, u_high, c_low, c_high):
    """delta = u_low - u_high at equal distance, without cancellation."""
    def difference(t):
        low = np.sqrt(2.0 * (nl.F(t) + c_low))
        high = np.sqrt(2.0 * (nl.F(t) + c_high))
        return 2.0 * (c_high - c_low) / ((low + high) * low * high)

    descriptor = dataclasses.replace(nl.descriptor("inv_2F_32"), amplitude=None)
    target = integrate_tail(difference, u_high, descriptor, nl.spec)
    if target == 0.0:
        return 0.0

    def h_low(t):
        return 1.0 / np.sqrt(2.0 * (nl.F(t) + c_low))

    first_guess = target / float(h_low(u_high))

    def accumulated(delta):
        return integrate_finite(h_low, u_high, u_high + delta, nl.spec)

    return invert_monotone(accumulated, target, (0.5 * first_guess, 2.0 * first_guess), tol=1e-9 * target,
                           domain=(0.0, np.inf))


def pair_gap_estimates(nl, energies=(0.0, 1.0), distances=None, u_start=None):
    """
    Tabulates the gap between the N = 1 profiles with energies C1 and C2.

    Both profiles blow up at r = 1. At every distance d the gap |u1 - u2| is
    compared with the bound int_{u2}^inf dt/F, and |F(u1) - F(u2)| is recorded.

    Args:
        nl (Nonlinearity): The nonlinearity.
        energies (tuple): (C1, C2); the profiles satisfy v^2/2 = F + C.
        distances (array-like): Distances to the boundary; three decades by default.
        u_start (float): Start of the phase paths.

    Returns:
        PairGapReport: The table and the fitted constant.
    """
    c1, c2 = (float(c) for c in energies)
    if distances is None:
        distances = np.geomspace(1e-2, 1e-5, 7)
    c_low, c_high = min(c1, c2), max(c1, c2)
    if u_start is None:
        u_start = nl.a + 10.0 * max(1.0, float(np.max(np.abs(energies))))
    path = solve_energy_profile(nl, 1, u_start, -c_high)
    descriptor = nl.descriptor("inv_F")
    rows = []
    for d in distances:
        u_high = path.u_at_distance(float(d))
        delta = _energy_gap(nl, u_high, c_low, c_high) if c_high > c_low else 0.0
        u_low = u_high + delta
        u1, u2 = (u_low, u_high) if c1 <= c2 else (u_high, u_low)
        bound = integrate_tail(lambda t: 1.0 / nl.F(t), u2, descriptor, nl.spec)
        energy_gap = delta * float(nl.f(u_high + 0.5 * delta))
        rows.append({"d": float(d), "u1": u1, "u2": u2, "gap": delta, "bound": bound,
                     "ratio": delta / bound, "energy_gap": energy_gap})
    table = pd.DataFrame(rows)
    ratios = table["ratio"].to_numpy()
    constant = float(np.median(ratios))
    spread = float(ratios.max() / ratios.min() - 1.0) if ratios.min() > 0 else 0.0
    logger.info(f"pair gap {nl.label}: C={constant:.6g}, spread {spread:.3g}")
    return PairGapReport(table, constant, spread, float(table["energy_gap"].abs().max()))


def error_term_gap(first, second, samples=200):
    """
    w = g1 - g2 on a common u grid of two phase paths leaving the same point.

    Both paths must start at the same (u_start, r_start) and differ only in
    the error term there; |w| is then nonincreasing and bounded by the
    starting gap. Profiles matched to the same blow-up radius start from
    different radii and are refused.

    Args:
        first (PhasePath): First path.
        second (PhasePath): Second path.
        samples (int): Grid size.

    Returns:
        pd.DataFrame: Columns u, w.

    Raises:
        ValueError: The paths start at different u or r.
    """
    if not math.isclose(first.u_start, second.u_start, rel_tol=1e-12):
        raise ValueError(f"paths start at different u: {first.u_start:.17g} and {second.u_start:.17g}")
    if not math.isclose(first.r[0], second.r[0], rel_tol=1e-12, abs_tol=1e-15):
        raise ValueError(f"paths start at different radii: {first.r[0]:.17g} and {second.r[0]:.17g}")
    lo = first.u_start
    hi = min(first.u_stop, second.u_stop)
    u = lo + np.geomspace(1.0, hi - lo + 1.0, samples) - 1.0
    return pd.DataFrame({"u": u, "w": first.g_at(u) - second.g_at(u)})
