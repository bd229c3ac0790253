import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from src.nonlinearity.antiderivative import antiderivative_G
from src.nonlinearity.profile import leading_profile
from src.numerics.quadrature import integrate_finite
from src.phase_plane.shooting import solve_energy_profile, solve_large_solution
from src.picard.fixed_point import fixed_point, invert_uk_distance
from src.universality.criterion import BOUNDED_BELOW, default_lower_limit, phi

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GapTable:
    """
    Second-term gaps u1 - u0 along a sequence of radii.

    Attributes:
        frame (pd.DataFrame): Columns d, r, u0, u1, gap, bound, between, quadratic.
        liminf_positive (bool): The gap at the smallest distance stays above
            BOUNDED_BELOW times the median gap.
    """

    frame: pd.DataFrame
    liminf_positive: bool


def _G_over_2F_32(nl, G):
    def integrand(t):
        return G(t) / (2.0 * np.asarray(nl.F(t), dtype=float)) ** 1.5
    return integrand


def second_term_gap(nl, N, distances, result=None):
    """
    Tabulates u1(r) - u0(r) with the quantities bounding it.

    bound = (N-1) sqrt(2F(u0)) int_{u1}^inf G/(2F)**1.5, a lower bound of the
    gap up to a factor 1 + o(1). The columns between = int_{u0}^{u1} G/(2F)**1.5
    and quadratic = (u1 - u0)**2 / (4F(u0)) measure the second-order remainder.

    Args:
        nl (Nonlinearity): The nonlinearity.
        N (int): Dimension.
        distances (array-like): Distances d = 1 - r.
        result (PicardResult): Iterates v0, v1 (computed when omitted).

    Returns:
        GapTable: The table and the liminf check.
    """
    if N > 1 and result is None:
        result = fixed_point(nl, N)
    G = antiderivative_G(nl, default_lower_limit(nl))
    integrand = _G_over_2F_32(nl, G)
    rows = []
    for d in sorted((float(d) for d in distances), reverse=True):
        u0 = leading_profile(nl, d)
        u1 = u0 if N == 1 else invert_uk_distance(result.iterate(1), d)
        two_F0 = 2.0 * float(nl.F(u0))
        rows.append({
            "d": d,
            "r": 1.0 - d,
            "u0": u0,
            "u1": u1,
            "gap": u1 - u0,
            "bound": (N - 1) * math.sqrt(two_F0) * phi(nl, u1) / math.sqrt(2.0 * float(nl.F(u1))),
            "between": integrate_finite(integrand, *sorted((u0, u1)), nl.spec),
            "quadratic": (u1 - u0) ** 2 / (2.0 * two_F0),
        })
    frame = pd.DataFrame(rows, columns=["d", "r", "u0", "u1", "gap", "bound", "between", "quadratic"])
    gaps = frame["gap"].to_numpy()
    persistent = bool(gaps.size and gaps[-1] > 0 and gaps[-1] > BOUNDED_BELOW * float(np.median(gaps)))
    logger.info(f"second-term gap for {nl.label}, N={N}: last {gaps[-1] if gaps.size else math.nan:.6g}, "
                f"liminf positive: {persistent}")
    return GapTable(frame, persistent)


def default_oracle(nl, N, distances):
    """
    d -> u(1 - d) of a reference solution.

    For N = 1 the zero-energy asymptotic profile (the one-dimensional rate
    itself); otherwise the radial large solution on the unit ball.
    """
    if N == 1:
        u_start = leading_profile(nl, min(0.5, 10.0 * max(distances)))
        path = solve_energy_profile(nl, 1, u_start, 0.0)
        return path.u_at_distance
    return solve_large_solution(nl, N).u_at_distance


def verify_one_term(nl, N, distances, oracle=None):
    """
    Compares u(r) - u0(r) with the bound C * phi(u).

    Args:
        nl (Nonlinearity): The nonlinearity.
        N (int): Dimension.
        distances (array-like): Distances d = 1 - r.
        oracle (callable): d -> u(1 - d); defaults to default_oracle.

    Returns:
        pd.DataFrame: Columns d, u, u0, difference, bound, ratio; the largest
        |ratio| is the fitted constant C.
    """
    distances = [float(d) for d in distances]
    oracle = oracle or default_oracle(nl, N, distances)
    rows = []
    for d in sorted(distances, reverse=True):
        u = float(oracle(d))
        u0 = leading_profile(nl, d)
        bound = phi(nl, u)
        rows.append({"d": d, "u": u, "u0": u0, "difference": u - u0, "bound": bound, "ratio": (u - u0) / bound})
    frame = pd.DataFrame(rows, columns=["d", "u", "u0", "difference", "bound", "ratio"])
    logger.info(f"one-term check for {nl.label}, N={N}: fitted C = {frame['ratio'].abs().max():.4g}")
    return frame
