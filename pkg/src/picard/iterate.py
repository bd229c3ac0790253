import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from src.errors import BracketError, ConfigError, NotContractingError, RadicandError
from src.nonlinearity.profile import leading_distance, leading_profile
from src.numerics.grid import LogGrid
from src.numerics.quadrature import integrate_cells, integrate_tail

logger = logging.getLogger(__name__)

U0_CAP = 1e12
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class PicardConfig:
    """
    Settings of the Picard iteration.

    Attributes:
        rho (float): Radius of the ball around v0, in (0, 1/4).
        grid_density (float): Grid points per decade.
        sup_tol (float): Stopping threshold on the sup-norm of successive differences.
        max_iters (int): Iteration budget.
        tail_fraction (float): Umax is chosen so that R0(Umax) <= tail_fraction * R0(U0).
        U0 (float): Fixed start of the interval; chosen automatically when None.
        refine_tol (float): The grid density is doubled until the fixed point moves by less than this.
        max_refinements (int): Budget of density doublings; 0 keeps the initial grid.
    """

    rho: float = 0.2
    grid_density: float = 32
    sup_tol: float = 1e-10
    max_iters: int = 50
    tail_fraction: float = 1e-5
    U0: float = None
    refine_tol: float = 2e-7
    max_refinements: int = 8

    def __post_init__(self):
        if not 0 < self.rho < 0.25:
            raise ConfigError(f"rho must lie in (0, 1/4), got {self.rho}")
        if self.grid_density <= 0 or self.sup_tol <= 0 or self.max_iters < 1:
            raise ConfigError("grid_density, sup_tol and max_iters must be positive")
        if not 0 < self.tail_fraction < 1:
            raise ConfigError(f"tail_fraction must lie in (0, 1), got {self.tail_fraction}")
        if self.refine_tol <= 0 or self.max_refinements < 0:
            raise ConfigError("refine_tol must be positive and max_refinements non-negative")


def _start_conditions(nl, N, rho, u0, density):
    """Returns (condition i value, condition ii sup) for a candidate U0."""
    radius_bound = leading_distance(nl, u0) / (1.0 - rho)
    if N == 1:
        return radius_bound, 0.0
    top = min(u0 * 1e8, nl.ceiling / 2.0)
    grid = LogGrid.build(u0, max(top, u0 * 10), density, origin=nl.a).nodes
    G0 = float(nl.G(u0))
    with np.errstate(over="ignore", invalid="ignore"):
        spread = 2.0 * (N - 1) * (nl.G(grid) - G0) / nl.F(grid)
    return radius_bound, float(np.nanmax(spread))


def choose_U0(nl, N, rho, density=32):
    """
    Smallest grid-aligned U0 meeting the sufficient conditions of the contraction argument.

    (i) R0(U0) / (1 - rho) <= 1/2, so that r >= 1/2 on [U0, inf);
    (ii) 2 (N - 1) (G(u) - G(U0)) / F(u) <= rho for all grid u >= U0.

    Args:
        nl (Nonlinearity): The nonlinearity (Keller-Osserman must hold).
        N (int): Dimension.
        rho (float): Ball radius, rho < 1/4.
        density (float): Candidates per decade of u - a.

    Returns:
        float: U0.

    Raises:
        BracketError: No candidate below the hard cap satisfies both conditions.
    """
    if not 0 < rho < 0.25:
        raise ConfigError(f"rho must lie in (0, 1/4), got {rho}")
    exponent = int(math.floor(-2 * density))
    while True:
        u0 = nl.a + 10.0 ** (exponent / density)
        if u0 - nl.a > U0_CAP or u0 > nl.ceiling:
            raise BracketError(f"no admissible U0 below {U0_CAP:g} for {nl.label}, N={N}, rho={rho}")
        if float(nl.F(u0)) > 0:
            radius_bound, spread = _start_conditions(nl, N, rho, u0, density)
            if radius_bound <= 0.5 and spread <= rho:
                logger.info(f"U0={u0:.6g} for {nl.label}, N={N}, rho={rho} (i: {radius_bound:.4g}, ii: {spread:.4g})")
                return u0
        exponent += 1


def choose_Umax(nl, U0, tail_fraction):
    """Grid top: R0(Umax) <= tail_fraction * R0(U0)."""
    return max(leading_profile(nl, tail_fraction * leading_distance(nl, U0)), U0 * 10.0)


class VIterate:
    """
    A profile v(u) on [U0, inf), stored as v/v0 at the grid nodes.

    Between nodes v/v0 is a cubic spline in ln(u - a); beyond Umax it follows
    the model v/v0 = 1 - c1 * Q(u) with Q = G / (2F). The distance
    T(u) = int_u^inf dt/v is tabulated top-down at construction.

    Args:
        nl (Nonlinearity): The nonlinearity.
        grid (LogGrid): Nodes U0 = u_0 < ... < u_n = Umax.
        ratio (np.ndarray): v/v0 at the nodes.
        c1 (float): Tail coefficient.
        k (int): Iterate index.
    """

    def __init__(self, nl, grid, ratio, c1=0.0, k=0):
        self.nl = nl
        self.grid = grid
        self.ratio = np.asarray(ratio, dtype=float)
        self.ratio.flags.writeable = False
        self.c1 = float(c1)
        self.k = k
        self._log_nodes = np.log(grid.nodes - nl.a)
        self._spline = CubicSpline(self._log_nodes, self.ratio - 1.0)
        cells = integrate_cells(self._inv_v, grid.nodes[:-1], grid.nodes[1:])
        self.tail_distance = self._tail_distance(self.grid.umax)
        self.distance_nodes = self.tail_distance + np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])

    @classmethod
    def leading(cls, nl, grid):
        """v0 = sqrt(2F) itself."""
        return cls(nl, grid, np.ones(len(grid)), 0.0, 0)

    @property
    def U0(self):
        return self.grid.u0

    @property
    def Umax(self):
        return self.grid.umax

    def Q(self, u):
        with np.errstate(over="ignore", invalid="ignore"):
            return self.nl.G(u) / (2.0 * self.nl.F(u))

    def ratio_at(self, u):
        """v/v0 at u >= U0."""
        u = np.asarray(u, dtype=float)
        inside = np.clip(u, self.U0, self.Umax)
        values = 1.0 + self._spline(np.log(inside - self.nl.a))
        if self.c1 != 0.0 and np.any(u > self.Umax):
            values = np.where(u > self.Umax, 1.0 - self.c1 * self.Q(np.maximum(u, self.Umax)), values)
        return values if values.ndim else float(values)

    def v(self, u):
        return np.sqrt(2.0 * self.nl.F(u)) * self.ratio_at(u)

    def _inv_v(self, u):
        return 1.0 / self.v(u)

    def _tail_distance(self, u):
        descriptor = dataclasses.replace(self.nl.descriptor("inv_sqrt_2F"), amplitude=None)
        return integrate_tail(self._inv_v, float(u), descriptor, self.nl.spec)

    def distance(self, u):
        """T(u) = int_u^inf dt / v, for u >= U0."""
        u = float(u)
        if u < self.U0:
            raise ValueError(f"u={u:.6g} below U0={self.U0:.6g}")
        if u >= self.Umax:
            return self._tail_distance(u) if u > self.Umax else self.tail_distance
        i = int(np.searchsorted(self.grid.nodes, u, side="right")) - 1
        partial = float(integrate_cells(self._inv_v, np.array([u]), np.array([self.grid.nodes[i + 1]]))[0])
        return float(self.distance_nodes[i + 1] + partial)

    def r(self, u):
        return 1.0 - self.distance(u)

    def u_at_distance(self, d):
        """Inverse of the distance: u with T(u) = d."""
        if d > self.distance_nodes[0]:
            raise ValueError(f"distance {d:.6g} beyond the interval start (max {self.distance_nodes[0]:.6g})")
        if d < self.tail_distance:
            hi = self.Umax * 2.0
            for _ in range(400):
                if self._tail_distance(hi) <= d:
                    break
                hi = self.nl.a + 4.0 * (hi - self.nl.a)
            else:
                raise BracketError(f"distance {d:.3g} not reached below overflow")
            return brentq(lambda t: self._tail_distance(t) - d, self.Umax, hi, xtol=1e-300, rtol=4 * _EPS)
        i = int(np.searchsorted(-self.distance_nodes, -d, side="left"))
        i = min(max(i, 1), len(self.grid) - 1)
        lo, hi = self.grid.nodes[i - 1], self.grid.nodes[i]
        return brentq(lambda t: self.distance(t) - d, lo, hi, xtol=1e-300, rtol=4 * _EPS)

    def deviation(self, samples=None):
        """sup |v/v0 - 1| on the oversampled grid."""
        points = self.grid.oversampled() if samples is None else samples
        return float(np.max(np.abs(self.ratio_at(points) - 1.0)))


def apply_N(v, nl, N, U0=None, rho=None):
    """
    One application of the map

        N(v)(u) = sqrt(2 (F(u) - (N-1) int_{U0}^u v/r dt)),  r = 1 - int_u^inf dt/v.

    Args:
        v (VIterate): Current iterate.
        nl (Nonlinearity): The nonlinearity.
        N (int): Dimension.
        U0 (float): Start of the interval (defaults to the grid start).
        rho (float): When given, v must lie in the ball of radius rho around v0.

    Returns:
        VIterate: The next iterate, index k + 1.

    Raises:
        NotContractingError: v lies outside the ball.
        RadicandError: F - (N-1) int v/r <= 0 at some node.
    """
    if U0 is not None and abs(U0 - v.U0) > 1e-12 * abs(U0):
        raise ValueError(f"iterate grid starts at {v.U0:.6g}, not at U0={U0:.6g}")
    if rho is not None:
        deviation = v.deviation()
        if deviation > rho:
            raise NotContractingError(f"iterate {v.k} left the ball: |v/v0 - 1| = {deviation:.4g} > {rho}", ())
    nodes = v.grid.nodes
    if N == 1:
        return VIterate(nl, v.grid, np.ones_like(nodes), 0.0, v.k + 1)
    log_nodes = np.log(nodes - nl.a)
    log_distance = CubicSpline(log_nodes, np.log(v.distance_nodes))

    def integrand(t):
        r = 1.0 - np.exp(log_distance(np.log(t - nl.a)))
        return v.v(t) / r

    cells = integrate_cells(integrand, nodes[:-1], nodes[1:])
    outer = np.concatenate([[0.0], np.cumsum(cells)])
    radicand = 1.0 - (N - 1) * outer / nl.F(nodes)
    if np.any(radicand <= 0):
        bad = int(np.argmax(radicand <= 0))
        raise RadicandError(f"radicand {radicand[bad]:.3g} <= 0 at u={nodes[bad]:.6g}; enlarge U0")
    ratio = np.sqrt(radicand)
    c1 = (1.0 - ratio[-1]) / float(v.Q(nodes[-1]))
    return VIterate(nl, v.grid, ratio, c1, v.k + 1)
