import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from src.errors import ProfileTerminatedError
from src.nonlinearity.profile import leading_profile
from src.numerics.quadrature import integrate_cells, integrate_tail

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class PhasePath:
    """
    Sampled solution (u, g, r) of the phase-plane system

        dg/du = (N-1) v / r,  dr/du = 1 / v,  v = sqrt(2 (F(u) - g)).

    Distances to the blow-up radius are accumulated from the top of the
    path so that they keep full relative precision as r approaches it.

    Attributes:
        nl (Nonlinearity): The nonlinearity.
        N (int): Dimension.
        u (np.ndarray): Sample nodes, geometric in 1 + u - a.
        g (np.ndarray): Error term at the nodes.
        r (np.ndarray): Radius at the nodes (integrated forwards).
        distance_nodes (np.ndarray): R_inf - r at the nodes (accumulated backwards).
        tail_distance (float): Frozen-g tail integral beyond the last node.
        blowup_radius (float): R_inf.
        solution (OdeSolution): Dense output in z = ln(1 + u - a).
    """

    nl: object
    N: int
    u: np.ndarray
    g: np.ndarray
    r: np.ndarray
    distance_nodes: np.ndarray
    tail_distance: float
    blowup_radius: float
    solution: object

    @property
    def v(self):
        return np.sqrt(2.0 * (self.nl.F(self.u) - self.g))

    @property
    def u_start(self):
        return float(self.u[0])

    @property
    def u_stop(self):
        return float(self.u[-1])

    def _z(self, u):
        return np.log1p(np.asarray(u, dtype=float) - self.nl.a)

    def g_at(self, u):
        """Error term at u; frozen at its last value beyond the path."""
        u = np.asarray(u, dtype=float)
        inside = np.minimum(u, self.u_stop)
        if np.any(inside < self.u_start * (1 - 1e-14) - 1e-300):
            raise ValueError(f"u below the start of the path ({self.u_start:.6g})")
        z = self._z(np.maximum(inside, self.u_start))
        values = self.solution(np.ravel(z))[0].reshape(np.shape(z))
        return values if values.ndim else float(values)

    def v_at(self, u):
        return np.sqrt(2.0 * np.maximum(self.nl.F(u) - self.g_at(u), 0.0))

    def _inv_v(self, u):
        return 1.0 / self.v_at(u)

    def _frozen_tail(self, u):
        g_last = float(self.g[-1])

        def integrand(t):
            return 1.0 / np.sqrt(2.0 * (self.nl.F(t) - g_last))

        descriptor = dataclasses.replace(self.nl.descriptor("inv_sqrt_2F"), amplitude=None)
        return integrate_tail(integrand, float(u), descriptor, self.nl.spec)

    def distance(self, u):
        """R_inf - r(u), accurate in relative terms up to the boundary."""
        u = float(u)
        if u >= self.u_stop:
            return self._frozen_tail(u) if u > self.u_stop else self.tail_distance
        i = int(np.searchsorted(self.u, u, side="right")) - 1
        if i < 0:
            raise ValueError(f"u={u:.6g} below the start of the path")
        partial = float(integrate_cells(self._inv_v, np.array([u]), np.array([self.u[i + 1]]))[0])
        return float(self.distance_nodes[i + 1] + partial)

    def r_at(self, u):
        return self.blowup_radius - self.distance(u)

    def u_at_distance(self, d):
        """
        Inverts the distance: the u at which R_inf - r(u) = d.

        Raises:
            ValueError: d is larger than the distance of the first sample.
        """
        if d > self.distance_nodes[0]:
            raise ValueError(f"distance {d:.6g} beyond the start of the path ({self.distance_nodes[0]:.6g})")
        if d < self.tail_distance:
            hi = self.u_stop * 2.0
            while self._frozen_tail(hi) > d:
                hi = self.nl.a + 4.0 * (hi - self.nl.a)
            return brentq(lambda t: self._frozen_tail(t) - d, self.u_stop, hi, xtol=1e-300, rtol=4 * _EPS)
        i = int(np.searchsorted(-self.distance_nodes, -d, side="left"))
        i = min(max(i, 1), self.u.size - 1)
        lo, hi = self.u[i - 1], self.u[i]
        if self.distance_nodes[i] == d:
            return float(hi)
        return brentq(lambda t: self.distance(t) - d, lo, hi, xtol=1e-300, rtol=4 * _EPS)

    def to_frame(self):
        """Samples as a DataFrame with columns u, g, r, v."""
        return pd.DataFrame(
            {"u": self.u, "g": self.g, "r": self.blowup_radius - self.distance_nodes, "v": self.v}
        )


def stop_value(nl, stop_distance, u_start):
    """Largest u of a path: where the leading distance drops to `stop_distance`."""
    u_stop = leading_profile(nl, stop_distance)
    # stay below the overflow ceiling and always cover a few decades
    u_stop = max(u_stop, nl.a + 1e3 * (u_start - nl.a + 1.0))
    return min(u_stop, nl.ceiling / 2.0)


def integrate_phase(nl, N, u_start, g_start, r_start, u_stop=None, rtol=1e-10, samples_per_decade=64,
                    stop_distance=1e-8):
    """
    Integrates the phase-plane system from u_start to u_stop.

    The system is solved with an embedded 8(5,3) Runge-Kutta pair in the
    variable z = ln(1 + u - a); the blow-up radius adds the frozen-g tail
    integral beyond u_stop.

    Args:
        nl (Nonlinearity): The nonlinearity.
        N (int): Dimension, N >= 1.
        u_start (float): Initial u, above the threshold.
        g_start (float): Initial error term, F(u_start) - g_start > 0.
        r_start (float): Initial radius in (0, 1].
        u_stop (float): Last u; defaults to the point where the leading distance is `stop_distance`.
        rtol (float): Relative tolerance of the step controller.
        samples_per_decade (int): Sample density in 1 + u - a.
        stop_distance (float): Leading distance at the default u_stop.

    Returns:
        PhasePath: The sampled path.

    Raises:
        ProfileTerminatedError: F - g reached zero.
    """
    if N < 1:
        raise ValueError(f"dimension must be >= 1, got {N}")
    if not 0 < r_start:
        raise ValueError(f"r_start must be positive, got {r_start}")
    a = nl.a
    if not float(nl.F(u_start)) - g_start > 0:
        raise ProfileTerminatedError("F(u_start) - g_start <= 0", u_start)
    if u_stop is None:
        u_stop = stop_value(nl, stop_distance, u_start)
    z_start, z_stop = math.log1p(u_start - a), math.log1p(u_stop - a)

    def rhs(z, y):
        g, r = y
        jac = math.exp(z)
        u = a - 1.0 + jac
        v = math.sqrt(max(2.0 * (float(nl.F(u)) - g), 1e-300))
        return [jac * (N - 1) * v / r, jac / v]

    def energy(z, y):
        return float(nl.F(a - 1.0 + math.exp(z))) - y[0]

    energy.terminal = True
    energy.direction = -1
    atol = [1e-12 * max(1.0, abs(g_start), float(nl.F(u_start))), 1e-14 * r_start]
    result = solve_ivp(rhs, (z_start, z_stop), [g_start, r_start], method="DOP853", rtol=rtol, atol=atol,
                       dense_output=True, events=energy)
    if result.status == 1:
        u_end = a - 1.0 + math.exp(result.t_events[0][0])
        raise ProfileTerminatedError("F - g reached zero", u_end)
    if result.status != 0:
        raise ProfileTerminatedError(result.message, a - 1.0 + math.exp(result.t[-1]))

    count = max(2, int(math.ceil((z_stop - z_start) / math.log(10.0) * samples_per_decade)) + 1)
    z = np.linspace(z_start, z_stop, count)
    u = a - 1.0 + np.exp(z)
    u[0], u[-1] = u_start, u_stop
    g, r = result.sol(z)

    def inv_v(t):
        t = np.asarray(t, dtype=float)
        gt = result.sol(np.log1p(np.ravel(t) - a))[0].reshape(t.shape)
        return 1.0 / np.sqrt(2.0 * (nl.F(t) - gt))

    cells = integrate_cells(inv_v, u[:-1], u[1:])
    g_last = float(g[-1])

    def frozen(t):
        return 1.0 / np.sqrt(2.0 * (nl.F(t) - g_last))

    descriptor = dataclasses.replace(nl.descriptor("inv_sqrt_2F"), amplitude=None)
    tail_distance = integrate_tail(frozen, u_stop, descriptor, nl.spec)
    distance_nodes = tail_distance + np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
    blowup_radius = r_start + float(distance_nodes[0])
    logger.debug(f"phase path N={N} from u={u_start:.6g}: R_inf={blowup_radius:.12g}, {result.nfev} evaluations")
    return PhasePath(nl, N, u, g, r, distance_nodes, tail_distance, blowup_radius, result.sol)
