import logging
import math

import numpy as np

from src.errors import PositivityError, TailModelError
from src.nonlinearity.antiderivative import GEvaluator
from src.nonlinearity.expression import compile_expression
from src.nonlinearity.tail import TailFamily, TailModel
from src.numerics.quadrature import DEFAULT_SPEC, CumulativeIntegral

logger = logging.getLogger(__name__)

# F values above this are treated as overflow territory
F_CEILING = 1e200


class Nonlinearity:
    """
    A nonlinearity f with its antiderivative F (based at the threshold a).

    Instances are immutable after construction and every cached table is
    built eagerly, so they can be shared between threads.

    Args:
        f (callable): Vectorised evaluator of f.
        F (callable): Vectorised evaluator of F, F(a) = energy_offset.
        a (float): Positivity threshold.
        tail (TailModel): Asymptotic model of F.
        label (str): Human readable name.
        energy_offset (float): Constant absorbed in F (F(a) equals it).
        ceiling (float): Largest u at which F may be evaluated safely.
        G (callable): Closed-form antiderivative of sqrt(2F) based at a, if known.
        params (dict): Family parameters, e.g. {"family": "power", "p": 3.0}.
        spec (QuadratureSpec): Accuracy contract for the derived integrals.
    """

    def __init__(self, f, F, a, tail, label, energy_offset=0.0, ceiling=None, G=None, params=None, spec=DEFAULT_SPEC):
        self.f = f
        self.F = F
        self.a = float(a)
        self.tail = tail
        self.label = label
        self.energy_offset = float(energy_offset)
        self.params = dict(params or {})
        self.spec = spec
        self.ceiling = float(ceiling) if ceiling is not None else tail.level_crossing(F_CEILING)
        self.G = GEvaluator(self, base=G)

    def __repr__(self):
        return f"Nonlinearity({self.label!r}, a={self.a:g}, tail={self.tail.kind.value})"

    @property
    def family(self):
        return self.params.get("family", "custom")

    def descriptor(self, integrand):
        """Tail descriptor of an F-derived integrand (see TailModel.descriptor)."""
        return self.tail.descriptor(integrand, self.ceiling)

    def inv_sqrt_2F(self, u):
        with np.errstate(divide="ignore", over="ignore"):
            return 1.0 / np.sqrt(2.0 * np.asarray(self.F(u), dtype=float))

    def verify(self, tol=1e-6, samples=100):
        """
        Re-checks the invariants of F on sampled points.

        Returns:
            list: Descriptions of the violated invariants; empty when all hold.
        """
        problems = []
        base_value = float(self.F(self.a))
        if abs(base_value - self.energy_offset) > tol * max(1.0, abs(self.energy_offset)):
            problems.append(f"F(a) = {base_value:.6g}, expected {self.energy_offset:.6g}")
        top = min(max(self.tail.cutoff * 10.0, self.a + 10.0), self.ceiling)
        lo = self.a + 1.0
        grid = self.a + np.geomspace(1.0, top - self.a, samples)
        values = np.asarray(self.F(np.concatenate([[self.a], self.a + np.geomspace(1e-3, 1.0, 20), grid])))
        if np.any(np.diff(values) < -tol * np.abs(values[1:])):
            problems.append("F is not nondecreasing")
        h = 1e-4 * np.maximum(1.0, np.abs(grid))
        slope = (np.asarray(self.F(grid + h)) - np.asarray(self.F(grid - h))) / (2 * h)
        f_values = np.asarray(self.f(grid))
        mismatch = np.abs(slope - f_values) / (1.0 + np.abs(f_values))
        if np.any(mismatch > tol):
            worst = int(np.argmax(mismatch))
            problems.append(f"F' differs from f by {mismatch[worst]:.3g} at u={grid[worst]:.6g} (from {lo:g})")
        return problems


def check_positivity(f, a, upper, samples=1000, strict_at_a=True):
    """
    Samples f >= 0 on a log grid above a.

    Args:
        f (callable): Evaluator of f.
        a (float): Threshold.
        upper (float): Largest sampled offset above a.
        samples (int): Number of samples.
        strict_at_a (bool): Also require f(a) > 0; otherwise some sample of the
            first decade must be positive.

    Raises:
        PositivityError: A sample violates the condition.
    """
    offsets = np.geomspace(1e-3, max(upper, 1.0), samples)
    points = a + offsets
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.asarray(f(points), dtype=float)
    bad = np.flatnonzero(~(values >= 0))
    if bad.size:
        raise PositivityError("f is negative above the threshold", float(points[bad[0]]))
    if strict_at_a:
        at_a = float(f(a))
        if not at_a > 0:
            raise PositivityError("f must be positive at the threshold", a)
    elif not np.any(values[offsets <= 1.0] > 0):
        raise PositivityError("f vanishes on the first decade above the threshold", float(points[0]))


def make_power(p, spec=DEFAULT_SPEC):
    """
    f(u) = u^p (zero for u < 0), F(u) = u^(p+1)/(p+1), a = 0.

    Args:
        p (float): Exponent, p > 1.
        spec (QuadratureSpec): Accuracy contract for the derived integrals.

    Returns:
        Nonlinearity: The power nonlinearity.
    """
    p = float(p)
    if not p > 1:
        raise ValueError(f"make_power needs p > 1, got {p}")
    s = p + 1.0
    amplitude = math.sqrt(2.0 / s) / ((p + 3.0) / 2.0)

    def f(u):
        return np.maximum(u, 0.0) ** p

    def F(u):
        return np.maximum(u, 0.0) ** s / s

    def G(u):
        return amplitude * np.maximum(u, 0.0) ** ((p + 3.0) / 2.0)

    check_positivity(f, 0.0, 1e3, strict_at_a=False)
    tail = TailModel.power_law(1.0 / s, s, cutoff=1.0, validation_tol=1e-10)
    nl = Nonlinearity(f, F, 0.0, tail, f"u^{p:g}", G=G, params={"family": "power", "p": p}, spec=spec)
    tail.validate(F, min(nl.ceiling, 1e6))
    logger.debug(f"built power nonlinearity p={p:g}")
    return nl


def make_exponential(spec=DEFAULT_SPEC):
    """
    f(u) = F(u) = e^u with a = 0; F(a) = 1 is recorded as the energy offset.

    Args:
        spec (QuadratureSpec): Accuracy contract for the derived integrals.

    Returns:
        Nonlinearity: The exponential nonlinearity.
    """
    def G(u):
        return 2.0 * math.sqrt(2.0) * (np.exp(np.asarray(u, dtype=float) / 2.0) - 1.0)

    tail = TailModel.exponential(1.0, 1.0, cutoff=1.0, validation_tol=1e-10)
    return Nonlinearity(np.exp, np.exp, 0.0, tail, "e^u", energy_offset=1.0, G=G, params={"family": "exponential"},
                        spec=spec)


def make_custom(expr, a, tail, table_limit=None, max_cell=None, spec=DEFAULT_SPEC):
    """
    Nonlinearity from an expression; F is tabulated by quadrature from a.

    Args:
        expr (str): Expression in u (see src.nonlinearity.expression).
        a (float): Positivity threshold, f(a) > 0.
        tail (TailModel): Asymptotic model of F, validated by sampling.
        table_limit (float): Largest u covered by the F table.
        max_cell (float): Cell width cap of the F table (oscillatory f).
        spec (QuadratureSpec): Accuracy contract.

    Returns:
        Nonlinearity: The nonlinearity.

    Raises:
        ExpressionSyntaxError: `expr` is malformed.
        PositivityError: f is not positive at a or negative above it.
        TailModelError: `tail` does not describe F.
    """
    f = compile_expression(expr)
    a = float(a)
    if table_limit is None:
        table_limit = 1e8 * max(1.0, abs(a), abs(tail.cutoff))
    ceiling = min(tail.level_crossing(F_CEILING), table_limit)
    check_positivity(f, a, min(ceiling - a, 1e3 * max(1.0, tail.cutoff - a)))
    with np.errstate(over="ignore", invalid="ignore"):
        F = CumulativeIntegral(f, a, top=ceiling, spec=spec, max_cell=max_cell)
    if tail.analytic:
        upper = tail.cutoff + 50.0 / tail.exponent_or_rate if tail.kind is TailFamily.EXPONENTIAL else tail.cutoff * 1e3
        tail.validate(F, min(upper, ceiling))
    return Nonlinearity(f, F, a, tail, expr, ceiling=ceiling, params={"family": "custom", "expr": expr}, spec=spec)


def with_linear_extension(nl, m):
    """
    Replaces f below m by the line f(m) + (m - u), keeping f above m.

    The modification leaves F unchanged on [a, inf) and makes f grow
    linearly towards the negative axis.

    Args:
        nl (Nonlinearity): The nonlinearity.
        m (float): Junction point, m <= a.

    Returns:
        Nonlinearity: The modified nonlinearity.
    """
    if m > nl.a:
        raise TailModelError(f"linear extension point m={m} must not exceed the threshold a={nl.a}")
    f_m = float(nl.f(m))
    F_m = float(nl.F(m))

    def f(u):
        u = np.asarray(u, dtype=float)
        return np.where(u < m, f_m + (m - u), nl.f(np.maximum(u, m)))

    def F(u):
        u = np.asarray(u, dtype=float)
        below = F_m + f_m * (u - m) - 0.5 * (m - u) ** 2
        return np.where(u < m, below, nl.F(np.maximum(u, m)))

    params = dict(nl.params, extended_at=m)
    return Nonlinearity(
        f, F, nl.a, nl.tail, f"{nl.label} (linear below {m:g})", nl.energy_offset,
        nl.ceiling, G=nl.G._base, params=params, spec=nl.spec,
    )
