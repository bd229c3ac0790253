import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from src.errors import BracketError, KellerOssermanError, ProfileTerminatedError
from src.nonlinearity.conditions import keller_osserman
from src.nonlinearity.profile import leading_profile
from src.numerics.interpolation import monotone_interpolant
from src.numerics.quadrature import integrate_finite, integrate_tail
from src.numerics.roots import invert_monotone
from src.phase_plane.path import integrate_phase

logger = logging.getLogger(__name__)

SWITCH_FACTOR = 1e4
R_CAP = 10.0
START_RADIUS = 1e-6


@dataclass(frozen=True, eq=False)
class RadialSolution:
    """
    Radial large solution on the unit ball.

    The raw solution blows up at `path.blowup_radius` (within the shooting
    tolerance of 1); radii are rescaled by it so that u(r) -> inf as r -> 1.

    Attributes:
        path (PhasePath): Outer segment in phase-plane form.
        center_value (float): u(0).
        inner (OdeSolution): Dense (u, u') on [START_RADIUS, r_switch] in raw radius.
        r_switch (float): Raw hand-off radius.
        u_switch (float): Hand-off value of u.
        shooting_history (tuple): (center value, blow-up radius) pairs tried.
        overlap_error (float): Relative disagreement of both segments past the hand-off.
    """

    path: object
    center_value: float
    inner: object
    r_switch: float
    u_switch: float
    shooting_history: tuple = ()
    overlap_error: float = math.nan

    @property
    def nl(self):
        return self.path.nl

    @property
    def N(self):
        return self.path.N

    @property
    def scale(self):
        return self.path.blowup_radius

    def u_at(self, r):
        """u at scaled radius r in [0, 1)."""
        if not 0 <= r < 1:
            raise ValueError(f"radius must lie in [0, 1), got {r}")
        raw = r * self.scale
        if raw <= START_RADIUS:
            f_c = float(self.nl.f(self.center_value))
            return self.center_value + f_c * raw**2 / (2 * self.N)
        if raw <= self.r_switch:
            return float(self.inner(raw)[0])
        return float(self.path.u_at_distance((1.0 - r) * self.scale))

    def u_at_distance(self, d):
        """u at distance d = 1 - r from the boundary."""
        if d * self.scale < self.path.distance_nodes[0]:
            return float(self.path.u_at_distance(d * self.scale))
        return self.u_at(1.0 - d)

    def v_at(self, r):
        """du/dr at scaled radius r."""
        raw = r * self.scale
        if raw <= self.r_switch:
            return self.scale * float(self.inner(max(raw, START_RADIUS))[1])
        return self.scale * float(self.path.v_at(self.u_at(r)))

    def to_frame(self, samples=200):
        """Inner samples followed by the phase-plane samples: columns r, u, v, g."""
        r_inner = np.linspace(START_RADIUS, self.r_switch, samples)
        u_inner, v_inner = self.inner(r_inner)
        inner = pd.DataFrame({
            "r": r_inner / self.scale,
            "u": u_inner,
            "v": v_inner * self.scale,
            "g": self.nl.F(u_inner) - 0.5 * v_inner**2,
        })
        outer = self.path.to_frame()
        outer = pd.DataFrame({"r": outer["r"] / self.scale, "u": outer["u"], "v": outer["v"] * self.scale,
                              "g": outer["g"]})
        return pd.concat([inner, outer.iloc[1:]], ignore_index=True)


def switch_value(nl, center_value, samples_per_decade=64):
    """Smallest grid u with F(u) >= SWITCH_FACTOR * max(1, F(u_c))."""
    target = SWITCH_FACTOR * max(1.0, float(nl.F(center_value)))
    offset = max(center_value - nl.a, 1e-3)
    u = invert_monotone(nl.F, target, (center_value, center_value + offset), tol=1e-6 * target,
                        domain=(nl.a, nl.ceiling))
    step = math.log(10.0) / samples_per_decade
    z = math.ceil(math.log1p(u - nl.a) / step) * step
    return nl.a - 1.0 + math.exp(z)


def _inner_segment(nl, N, center_value, u_switch, rtol, r_cap=R_CAP, overshoot=None):
    f_c = float(nl.f(center_value))
    r0 = START_RADIUS
    y0 = [center_value + f_c * r0**2 / (2 * N), f_c * r0 / N]

    def rhs(r, y):
        u, v = y
        return [v, float(nl.f(u)) - (N - 1) * v / r]

    def reach(r, y):
        return y[0] - (overshoot if overshoot is not None else u_switch)

    reach.terminal = True
    reach.direction = 1
    atol = [1e-13 * max(1.0, abs(center_value)), 1e-13 * max(1.0, f_c)]
    return solve_ivp(rhs, (r0, r_cap), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True, events=reach)


def _shoot(nl, N, center_value, rtol, samples_per_decade, stop_distance):
    u_switch = switch_value(nl, center_value, samples_per_decade)
    inner = _inner_segment(nl, N, center_value, u_switch, rtol)
    if inner.status != 1:
        return math.inf, None
    r_switch = float(inner.t_events[0][0])
    u_s, v_s = inner.y_events[0][0]
    g_s = float(nl.F(u_switch)) - 0.5 * v_s**2
    path = integrate_phase(nl, N, u_switch, g_s, r_switch, rtol=rtol, samples_per_decade=samples_per_decade,
                           stop_distance=stop_distance)
    return path.blowup_radius, (inner, r_switch, u_switch, path)


def even_center_value(nl):
    """
    Center value of the one-dimensional even large solution on (-1, 1).

    Solves int_{u_c}^inf dt / sqrt(2 (F(t) - F(u_c))) = 1.
    """
    def blowup_radius(center):
        F_c = float(nl.F(center))
        width = max(1.0, center - nl.a)

        def integrand(t):
            return 1.0 / np.sqrt(2.0 * (nl.F(t) - F_c))

        near = integrate_finite(integrand, center, center + width, nl.spec)
        descriptor = dataclasses.replace(nl.descriptor("inv_sqrt_2F"), amplitude=None)
        return near + integrate_tail(integrand, center + width, descriptor, nl.spec)

    guess = leading_profile(nl, 1.0)
    return invert_monotone(blowup_radius, 1.0, (guess, guess + max(1.0, guess - nl.a)), tol=1e-9,
                           domain=(nl.a, nl.ceiling))


def solve_large_solution(nl, N, tol_radius=1e-8, rtol=1e-10, samples_per_decade=64, stop_distance=1e-8):
    """
    Radial large solution on the unit ball by shooting on u(0).

    The blow-up radius R_inf(u_c) decreases strictly in u_c; the bracket
    starts at the one-dimensional center value and is widened geometrically
    above the threshold, then Brent's method matches R_inf = 1.

    Args:
        nl (Nonlinearity): The nonlinearity (Keller-Osserman must hold).
        N (int): Dimension.
        tol_radius (float): Accepted |R_inf - 1|.
        rtol (float): Step controller tolerance.
        samples_per_decade (int): Phase path sample density.
        stop_distance (float): Leading distance at the end of the path.

    Returns:
        RadialSolution: The assembled solution.

    Raises:
        KellerOssermanError: The Keller-Osserman condition does not hold.
        BracketError: No center value bracket was found.
    """
    report = keller_osserman(nl)
    if not report.holds:
        raise KellerOssermanError(f"Keller-Osserman condition {report.verdict.value} for {nl.label}")
    history = []
    cache = {}

    def radius(center):
        if center not in cache:
            cache[center] = _shoot(nl, N, center, rtol, samples_per_decade, stop_distance)
            history.append((center, cache[center][0]))
            logger.debug(f"shot u_c={center:.15g}: R_inf={cache[center][0]:.15g}")
        return cache[center][0]

    def residual(center):
        return min(radius(center), R_CAP) - 1.0

    lo = even_center_value(nl)
    hi = nl.a + 2.0 * (lo - nl.a)
    for _ in range(80):
        if residual(hi) < 0:
            break
        lo, hi = hi, nl.a + 2.0 * (hi - nl.a)
    else:
        raise BracketError(f"no center value with R_inf < 1 found up to {hi:.6g}")
    for _ in range(80):
        if residual(lo) > 0:
            break
        hi, lo = lo, nl.a + 0.5 * (lo - nl.a)
    else:
        raise BracketError(f"no center value with R_inf > 1 found down to {lo:.6g}")
    logger.info(f"shooting bracket for {nl.label}, N={N}: [{lo:.12g}, {hi:.12g}]")
    center = brentq(residual, lo, hi, xtol=1e-300, rtol=1e-14, maxiter=200)
    blowup_radius, parts = cache[center] if center in cache else (radius(center), cache[center][1])
    if parts is None or abs(blowup_radius - 1.0) > tol_radius:
        raise BracketError(f"shooting stalled at u_c={center:.15g} with R_inf={blowup_radius:.15g}")
    inner, r_switch, u_switch, path = parts
    overlap = _overlap_error(nl, N, center, u_switch, r_switch, rtol, path)
    logger.info(f"large solution {nl.label}, N={N}: u(0)={center:.12g}, R_inf-1={blowup_radius - 1:.3g}")
    return RadialSolution(path, center, inner.sol, r_switch, u_switch, tuple(history), overlap)


def _overlap_error(nl, N, center, u_switch, r_switch, rtol, path):
    """Continues the radial integration past the hand-off and compares with the phase path."""
    overshoot = nl.a + 1.5 * (u_switch - nl.a)
    extended = _inner_segment(nl, N, center, u_switch, rtol, overshoot=overshoot)
    if extended.status != 1:
        return math.nan
    r_end = float(extended.t_events[0][0])
    errors = []
    for raw in np.linspace(r_switch, r_end, 6)[1:]:
        u_radial = float(extended.sol(raw)[0])
        u_phase = path.u_at_distance(path.blowup_radius - raw)
        errors.append(abs(u_phase / u_radial - 1.0))
    return max(errors)


def solve_energy_profile(nl, N, u_start, g_start, tol_radius=1e-10, rtol=1e-10, samples_per_decade=64,
                         stop_distance=1e-8):
    """
    Asymptotic radial profile starting at (u_start, g_start) that blows up at r = 1.

    The start radius is adjusted so that the blow-up radius is 1. For N = 1
    the error term is constant, -g_start is the energy of the profile, and
    the zero-energy profile is the one-dimensional blow-up rate.

    Returns:
        PhasePath: The matched path.
    """
    def path_for(r_start):
        return integrate_phase(nl, N, u_start, g_start, r_start, rtol=rtol,
                               samples_per_decade=samples_per_decade, stop_distance=stop_distance)

    first = path_for(0.5)
    r_start = 1.0 - float(first.distance_nodes[0])
    if not r_start > 0:
        raise ProfileTerminatedError("profile needs more than the unit radius", u_start)
    if N == 1:
        return path_for(r_start)
    for _ in range(50):
        path = path_for(r_start)
        mismatch = path.blowup_radius - 1.0
        if abs(mismatch) <= tol_radius:
            return path
        r_start -= mismatch
    raise BracketError(f"start radius did not settle for u_start={u_start:.6g}")


def error_term(sol):
    """
    Error term g(u) = F(u) - v^2/2 along a radial solution.

    Below the hand-off value it is interpolated (g is nondecreasing) from
    the radial segment; above it comes from the phase-plane dense output.
    """
    r_inner = np.linspace(START_RADIUS, sol.r_switch, 400)
    u_inner, v_inner = sol.inner(r_inner)
    g_inner = sol.nl.F(u_inner) - 0.5 * v_inner**2
    keep = np.concatenate([[True], np.diff(u_inner) > 0])
    inner = monotone_interpolant(u_inner[keep], np.maximum.accumulate(g_inner[keep]), extrapolate=True)

    def g(u):
        u = np.asarray(u, dtype=float)
        values = np.where(u >= sol.u_switch, sol.path.g_at(np.maximum(u, sol.u_switch)), inner(u))
        return values if values.ndim else float(values)

    return g


def ode_residual(sol, distances=(1e-1, 1e-2, 1e-3, 1e-4), radii=(0.1, 0.3)):
    """
    Relative residual of u'' + (N-1)/r u' - f(u) on the assembled solution.

    Second derivatives use fourth-order central stencils with step 1e-3 times
    the local scale (distance to the boundary, or the radius inside).

    Returns:
        pd.DataFrame: Columns r, u, residual.
    """
    rows = []
    points = [r for r in radii if r * sol.scale < sol.r_switch] + [1.0 - d for d in distances]
    for r in points:
        h = 1e-3 * min(1.0 - r, r)
        u = [sol.u_at(r + k * h) for k in (-2, -1, 0, 1, 2)]
        second = (-u[0] + 16 * u[1] - 30 * u[2] + 16 * u[3] - u[4]) / (12 * h * h)
        first = (u[0] - 8 * u[1] + 8 * u[3] - u[4]) / (12 * h)
        # the rescaled solution solves the equation with f multiplied by scale^2
        source = sol.scale**2 * float(sol.nl.f(u[2]))
        residual = second + (sol.N - 1) / r * first - source
        rows.append({"r": r, "u": u[2], "residual": abs(residual) / (abs(second) + abs(source))})
    return pd.DataFrame(rows)
