import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from src.errors import KellerOssermanError, NotContractingError
from src.nonlinearity.conditions import keller_osserman
from src.nonlinearity.profile import leading_distance
from src.numerics.grid import LogGrid
from src.numerics.quadrature import integrate_finite
from src.picard.iterate import PicardConfig, VIterate, apply_N, choose_U0, choose_Umax

logger = logging.getLogger(__name__)

# consecutive non-contracting steps tolerated before giving up
PATIENCE = 3


@dataclass(frozen=True, eq=False)
class PicardResult:
    """
    Outcome of the Picard iteration.

    Attributes:
        fixed_point (VIterate): Last iterate, on the finest grid.
        history (tuple): Iterates v_0, v_1, ..., v_K on the initial grid.
        differences (tuple): sup |v_{k+1}/v0 - v_k/v0| for k = 0..K-1.
        contraction (tuple): Ratios of successive differences.
        U0 (float): Start of the interval.
        rho (float): Ball radius.
        converged_at (int): First k with difference below sup_tol, or None.
        residual (float): sup |N(v) - v| / v0 at the returned fixed point.
        refinements (tuple): (grid density, sup change of the fixed point) per density doubling.
    """

    fixed_point: VIterate
    history: tuple
    differences: tuple
    contraction: tuple
    U0: float
    rho: float
    converged_at: int = None
    residual: float = float("nan")
    config: PicardConfig = field(default=None)
    refinements: tuple = ()

    def iterate(self, k):
        """v_k; indices at or past the last recorded iterate give the fixed point."""
        if k >= len(self.history) - 1:
            return self.fixed_point
        return self.history[k]

    def to_frame(self):
        """Iterate history with columns k, u, v_over_v0."""
        frames = [pd.DataFrame({"k": it.k, "u": it.grid.nodes, "v_over_v0": it.ratio}) for it in self.history]
        return pd.concat(frames, ignore_index=True)


def _difference(a, b):
    points = a.grid.oversampled()
    return float(np.max(np.abs(a.ratio_at(points) - b.ratio_at(points))))


def _iterate(current, nl, N, cfg):
    """Applies N from `current` until the sup difference drops below sup_tol."""
    history, differences, factors = [], [], []
    strikes = 0
    for k in range(1, cfg.max_iters + 1):
        following = apply_N(current, nl, N, rho=cfg.rho)
        diff = _difference(following, current)
        differences.append(diff)
        if len(differences) > 1 and differences[-2] > 0:
            factors.append(diff / differences[-2])
            logger.debug(f"iteration {k}: diff {diff:.3e}, kappa {factors[-1]:.4f}")
            strikes = strikes + 1 if factors[-1] >= 1 and diff > 10 * cfg.sup_tol else 0
            if strikes >= PATIENCE:
                raise NotContractingError(f"Picard map not contracting for {nl.label} at U0={current.U0:.6g}; "
                                          f"try a larger U0", tuple(factors))
        history.append(following)
        current = following
        if diff < cfg.sup_tol:
            return history, differences, factors, k
    logger.warning(f"Picard iteration for {nl.label} stopped after {cfg.max_iters} iterations "
                   f"(last difference {differences[-1]:.3e})")
    return history, differences, factors, None


def _refine(current, nl, N, cfg):
    """Doubles the grid density until the fixed point moves by less than refine_tol."""
    refinements = []
    for _ in range(cfg.max_refinements):
        grid = current.grid.refined()
        start = VIterate(nl, grid, current.ratio_at(grid.nodes), current.c1, current.k)
        history, _, _, _ = _iterate(start, nl, N, cfg)
        finer = history[-1]
        change = _difference(current, finer)
        refinements.append((grid.density, change))
        logger.debug(f"grid density {grid.density:g}: fixed point moved by {change:.3e}")
        current = finer
        if change < cfg.refine_tol:
            return current, tuple(refinements)
    if refinements:
        logger.warning(f"Picard fixed point for {nl.label} still moved by {refinements[-1][1]:.3e} "
                       f"at grid density {refinements[-1][0]:g}")
    return current, tuple(refinements)


def fixed_point(nl, N, cfg=None):
    """
    Iterates the map N from v0 = sqrt(2F) until successive iterates agree to sup_tol.

    The converged iterate is then carried to grids of doubled density and
    iterated again until a doubling moves it by less than refine_tol.

    Args:
        nl (Nonlinearity): The nonlinearity (Keller-Osserman must hold).
        N (int): Dimension.
        cfg (PicardConfig): Settings; defaults to PicardConfig().

    Returns:
        PicardResult: Iterates, differences and contraction factors.

    Raises:
        KellerOssermanError: The Keller-Osserman condition does not hold.
        NotContractingError: The contraction factor stayed >= 1 for PATIENCE steps.
    """
    cfg = cfg or PicardConfig()
    report = keller_osserman(nl)
    if not report.holds:
        raise KellerOssermanError(f"Keller-Osserman condition {report.verdict.value} for {nl.label}")
    U0 = cfg.U0 if cfg.U0 is not None else choose_U0(nl, N, cfg.rho, cfg.grid_density)
    Umax = choose_Umax(nl, U0, cfg.tail_fraction)
    grid = LogGrid.build(U0, Umax, cfg.grid_density, origin=nl.a)
    logger.info(f"Picard grid for {nl.label}, N={N}: [{U0:.6g}, {Umax:.6g}] with {len(grid)} nodes")
    leading = VIterate.leading(nl, grid)
    history, differences, factors, converged_at = _iterate(leading, nl, N, cfg)
    history = [leading] + history
    current, refinements = _refine(history[-1], nl, N, cfg)
    residual = _difference(apply_N(current, nl, N), current)
    logger.info(f"Picard fixed point for {nl.label}, N={N}: converged at {converged_at}, "
                f"{len(current.grid)} nodes, residual {residual:.3e}")
    return PicardResult(current, tuple(history), tuple(differences), tuple(factors), U0, cfg.rho, converged_at,
                        residual, cfg, refinements)


def invert_uk(vk, r):
    """
    u_k(r): solves int_u^inf dt / v_k = 1 - r.

    Args:
        vk (VIterate): The iterate.
        r (float): Radius, between r_min = 1 - T(U0) and 1.

    Returns:
        float: u_k(r).
    """
    d = 1.0 - r
    if not d > 0:
        raise ValueError(f"radius must be below 1, got {r}")
    if d > vk.distance_nodes[0]:
        raise ValueError(f"r={r} below r_min={1.0 - vk.distance_nodes[0]:.6g}")
    return vk.u_at_distance(d)


def invert_uk_distance(vk, d):
    """u_k at distance d from the boundary, without forming 1 - d."""
    if d > vk.distance_nodes[0]:
        raise ValueError(f"d={d} beyond the asymptotic range (max {vk.distance_nodes[0]:.6g})")
    return vk.u_at_distance(d)


def asymptotic_gap(result, k, distances, oracle):
    """
    Relative position of u_k between the true solution and the boundary.

    For each d computes int_{u_k}^{u} du/v0 / int_{u_k}^inf du/v0 and the
    same ratio with u_{k+1} in place of u.

    Args:
        result (PicardResult): Iterates.
        k (int): Iterate index.
        distances (array-like): Distances 1 - r.
        oracle (callable): d -> u(1 - d) of the true solution.

    Returns:
        pd.DataFrame: Columns d, u, u_k, u_next, ratio, next_ratio.
    """
    nl = result.fixed_point.nl
    vk, vnext = result.iterate(k), result.iterate(k + 1)
    rows = []
    for d in distances:
        u = float(oracle(d))
        uk = invert_uk_distance(vk, d)
        unext = invert_uk_distance(vnext, d)
        whole = leading_distance(nl, uk)
        rows.append({
            "d": float(d), "u": u, "u_k": uk, "u_next": unext,
            "ratio": _leading_between(nl, uk, u) / whole,
            "next_ratio": _leading_between(nl, uk, unext) / whole,
        })
    return pd.DataFrame(rows)


def _leading_between(nl, lo, hi):
    lo, hi = sorted((lo, hi))
    return integrate_finite(nl.inv_sqrt_2F, lo, hi, nl.spec)
