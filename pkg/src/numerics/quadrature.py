import logging
import math
import threading
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import quad

from src.errors import QuadratureError, TailModelError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Accuracy contract for adaptive quadrature.

    Attributes:
        rel_tol (float): Relative tolerance.
        abs_tol (float): Absolute tolerance.
        max_subdivisions (int): Subdivision budget of the adaptive scheme.
    """

    rel_tol: float = 1e-11
    abs_tol: float = 1e-300
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("Quadrature tolerances must be positive.")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be at least 10.")


DEFAULT_SPEC = QuadratureSpec()

# quad refuses relative tolerances below this
_QUAD_MIN_REL = 50 * np.finfo(float).eps


def _scalar(g):
    return lambda t: float(g(t))


def integrate_finite(g, lo, hi, spec=DEFAULT_SPEC):
    """
    Adaptive Gauss-Kronrod integration of g over [lo, hi].

    Endpoint algebraic singularities are handled by QUADPACK's graded
    subdivision with extrapolation.

    Args:
        g (callable): Integrand, evaluable on [lo, hi].
        lo (float): Lower limit.
        hi (float): Upper limit, hi >= lo.
        spec (QuadratureSpec): Accuracy contract.

    Returns:
        float: The integral.

    Raises:
        QuadratureError: Subdivision budget exhausted without meeting the tolerance.
    """
    if hi < lo:
        raise ValueError(f"integrate_finite needs lo <= hi, got [{lo}, {hi}].")
    if hi == lo:
        return 0.0
    result = quad(
        _scalar(g),
        lo,
        hi,
        epsabs=spec.abs_tol,
        epsrel=max(spec.rel_tol, _QUAD_MIN_REL),
        limit=spec.max_subdivisions,
        full_output=1,
    )
    value, abserr, info = result[0], result[1], result[2]
    if len(result) > 3:
        # roundoff or budget warnings are tolerated when the estimate is still close
        if math.isfinite(value) and abserr <= max(spec.abs_tol, 100 * spec.rel_tol * abs(value)):
            logger.debug(f"quad accepted with warning on [{lo:.6g}, {hi:.6g}]: {result[3]}")
            return float(value)
        raise QuadratureError(f"quadrature failed on [{lo:.6g}, {hi:.6g}]: {result[3]}", _worst_interval(info))
    if not math.isfinite(value):
        raise QuadratureError(f"non-finite integral on [{lo:.6g}, {hi:.6g}]")
    return float(value)


def _worst_interval(info):
    last = int(info.get("last", 0))
    if last <= 0:
        return None
    errors = np.asarray(info["elist"][:last])
    worst = int(np.argmax(errors))
    return float(info["alist"][worst]), float(info["blist"][worst]), float(errors[worst])


class TailKind(Enum):
    POWER = "PowerLaw"
    EXPONENTIAL = "Exponential"
    NUMERIC = "NumericOnly"


@dataclass(frozen=True)
class TailDescriptor:
    """
    Asymptotic shape of an integrand on [cutoff, +inf).

    POWER means g(t) ~ amplitude * t**(-decay); EXPONENTIAL means
    g(t) ~ amplitude * exp(-decay * t). A missing amplitude makes the
    descriptor shape-only: the closed-form remainder is then matched to the
    integrand at the split point.

    Attributes:
        kind (TailKind): Family of the asymptotic model.
        decay (float): Power exponent e or exponential rate.
        amplitude (float): Model amplitude, or None.
        cutoff (float): Point beyond which the model is trusted.
        ceiling (float): Largest t at which g may be evaluated without overflow.
        tolerance (float): Allowed relative mismatch at the split point.
    """

    kind: TailKind
    decay: float = 0.0
    amplitude: float = None
    cutoff: float = 1.0
    ceiling: float = math.inf
    tolerance: float = 0.1

    @property
    def diverges(self):
        if self.kind is TailKind.POWER:
            return self.decay <= 1.0
        if self.kind is TailKind.EXPONENTIAL:
            return self.decay <= 0.0
        return False

    def model(self, t):
        if self.kind is TailKind.POWER:
            return self.amplitude * t ** (-self.decay)
        return self.amplitude * math.exp(-self.decay * t)

    def remainder(self, x, gx):
        """Closed-form integral of the model from x to +inf, scaled to pass through (x, gx)."""
        if self.kind is TailKind.POWER:
            return gx * x / (self.decay - 1.0)
        return gx / self.decay

    def step(self, x):
        if self.kind is TailKind.POWER:
            return x * 10.0 if x > 0 else 1.0
        return x + 20.0 / self.decay

    def validate(self, g, x, gx):
        """
        Checks that g follows the model near x.

        Raises:
            TailModelError: The local decay or the amplitude disagrees with the model.
        """
        if gx == 0.0:
            return
        if not math.isfinite(gx):
            raise TailModelError(f"integrand not finite at tail split point {x:.6g}")
        if self.kind is TailKind.POWER:
            nearby = x * 1.05
            slope = -math.log(abs(float(g(nearby))) / abs(gx)) / math.log(1.05)
        else:
            nearby = x + 0.1 / self.decay
            slope = -math.log(abs(float(g(nearby))) / abs(gx)) / (nearby - x)
        if abs(slope - self.decay) > self.tolerance * max(1.0, abs(self.decay)):
            raise TailModelError(
                f"integrand decays at rate {slope:.6g} near {x:.6g}, descriptor claims {self.decay:.6g}"
            )
        if self.amplitude is not None:
            ratio = gx / self.model(x)
            if abs(ratio - 1.0) > self.tolerance:
                raise TailModelError(f"integrand/model ratio {ratio:.6g} at {x:.6g} exceeds tolerance")


def integrate_tail(g, lo, tail, spec=DEFAULT_SPEC):
    """
    Improper integral of g over [lo, +inf).

    The finite part is integrated adaptively up to a split point that is
    pushed outwards until the matched closed-form remainder is negligible
    (or the overflow ceiling is reached); the remainder is then added.

    Args:
        g (callable): Integrand.
        lo (float): Lower limit.
        tail (TailDescriptor): Asymptotic shape of g.
        spec (QuadratureSpec): Accuracy contract.

    Returns:
        float: The integral, or math.inf when the descriptor implies divergence.

    Raises:
        TailModelError: g does not follow the descriptor at the split point.
    """
    if tail.diverges:
        return math.inf
    if tail.kind is TailKind.NUMERIC:
        value, abserr = quad(
            _scalar(g), lo, math.inf, epsabs=spec.abs_tol,
            epsrel=max(spec.rel_tol, _QUAD_MIN_REL), limit=spec.max_subdivisions,
        )
        if not math.isfinite(value):
            raise QuadratureError(f"tail integral from {lo:.6g} did not converge")
        return float(value)
    x = max(lo, tail.cutoff)
    total = integrate_finite(g, lo, x, spec) if x > lo else 0.0
    while True:
        gx = float(g(x))
        remainder = tail.remainder(x, gx)
        exact = tail.amplitude is not None and gx != 0.0 and abs(gx / tail.model(x) - 1.0) <= spec.rel_tol
        nxt = tail.step(x)
        if exact or abs(remainder) <= max(spec.abs_tol, spec.rel_tol * abs(total + remainder)) or nxt > tail.ceiling:
            break
        total += integrate_finite(g, x, nxt, spec)
        x = nxt
    tail.validate(g, x, gx)
    return total + remainder


_GL_RULES = {}


def gauss_legendre(order):
    """Cached Gauss-Legendre nodes and weights on [-1, 1]."""
    if order not in _GL_RULES:
        _GL_RULES[order] = np.polynomial.legendre.leggauss(order)
    return _GL_RULES[order]


def integrate_cells(g, lo, hi, order=10):
    """
    Fixed-order Gauss-Legendre integrals over many cells at once.

    Args:
        g (callable): Vectorised integrand accepting 2-D arrays.
        lo (np.ndarray): Cell left ends.
        hi (np.ndarray): Cell right ends.
        order (int): Points per cell.

    Returns:
        np.ndarray: One integral per cell.
    """
    x, w = gauss_legendre(order)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    points = mid[..., None] + half[..., None] * x
    return np.sum(np.asarray(g(points), dtype=float) * w, axis=-1) * half


class CumulativeIntegral:
    """
    Tabulated antiderivative t -> integral of h from `base` to t.

    The first unit cell above `base` is integrated adaptively (it may carry an
    endpoint singularity); further cells are geometric in ``t - base`` and use
    Gauss-Legendre rules. The table grows on demand under a lock, so one
    instance can be shared between threads.

    Args:
        integrand (callable): Vectorised integrand h.
        base (float): Base point of the antiderivative.
        top (float): Initial table extent (built eagerly).
        density (int): Cells per decade.
        spec (QuadratureSpec): Accuracy contract for the adaptive parts.
        max_cell (float): Optional cap on the cell width, for oscillatory integrands.
    """

    ORDER = 12

    def __init__(self, integrand, base, top=1e6, density=32, spec=DEFAULT_SPEC, max_cell=None):
        self.integrand = integrand
        self.base = float(base)
        self.density = density
        self.spec = spec
        self.max_cell = max_cell
        self._lock = threading.Lock()
        self._offsets = np.array([1.0])
        self._values = np.array([integrate_finite(integrand, self.base, self.base + 1.0, spec)])
        self._extend(max(float(top) - self.base, 10.0))

    def _extend(self, offset):
        current = self._offsets[-1]
        if offset <= current:
            return
        decades = math.ceil(math.log10(offset / current) + 1e-12)
        count = decades * self.density
        new = current * 10.0 ** (np.arange(1, count + 1) / self.density)
        edges = np.concatenate([[current], new])
        if self.max_cell is not None:
            pieces = np.maximum(1, np.ceil(np.diff(edges) / self.max_cell).astype(int))
            edges = np.concatenate(
                [np.linspace(lo, hi, n, endpoint=False) for lo, hi, n in zip(edges[:-1], edges[1:], pieces)]
                + [edges[-1:]]
            )
            new = edges[1:]
        with np.errstate(over="ignore", invalid="ignore"):
            cells = integrate_cells(self.integrand, self.base + edges[:-1], self.base + edges[1:], self.ORDER)
            values = self._values[-1] + np.cumsum(cells)
        self._offsets = np.concatenate([self._offsets, new])
        self._values = np.concatenate([self._values, values])

    @property
    def top(self):
        return self.base + float(self._offsets[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        offsets = flat - self.base
        out = np.empty_like(flat)
        near = offsets < 1.0
        for i in np.flatnonzero(near):
            lo, hi = sorted((self.base, flat[i]))
            sign = 1.0 if flat[i] >= self.base else -1.0
            out[i] = sign * integrate_finite(self.integrand, lo, hi, self.spec)
        far = ~near
        if np.any(far):
            with self._lock:
                self._extend(float(offsets[far].max()))
                table_offsets, table_values = self._offsets, self._values
            idx = np.searchsorted(table_offsets, offsets[far], side="right") - 1
            left = self.base + table_offsets[idx]
            with np.errstate(over="ignore", invalid="ignore"):
                partial = integrate_cells(self.integrand, left, flat[far], self.ORDER)
            out[far] = table_values[idx] + partial
        return out.reshape(t.shape) if t.ndim else float(out[0])
