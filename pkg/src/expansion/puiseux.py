import math
from dataclasses import dataclass

import numpy as np

from src.errors import LatticeMismatchError, SeriesResonanceError

# exponents closer than this are considered equal
_LATTICE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PuiseuxSeries:
    """
    Truncated generalised power series sum_k c_k x**(alpha + k*delta).

    The stored coefficients are exact up to index len(coeffs) - 1; everything
    from the exponent `order` = alpha + len(coeffs)*delta on is unknown and
    every operation propagates that truncation.

    Attributes:
        alpha (float): Exponent of the first stored term.
        delta (float): Lattice step, delta > 0.
        coeffs (np.ndarray): Coefficients c_0, ..., c_M.
        variable (str): Name of the expansion variable ("X" for 1/u, "x", "d").
    """

    alpha: float
    delta: float
    coeffs: np.ndarray
    variable: str = "x"

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"lattice step must be positive, got {self.delta}")
        coeffs = np.array(self.coeffs, dtype=float).ravel()
        if coeffs.size == 0:
            raise ValueError("a series needs at least one coefficient")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "delta", float(self.delta))

    @classmethod
    def monomial(cls, exponent, length, delta=1.0, coefficient=1.0, variable="x"):
        """coefficient * x**exponent, known exactly up to `length` lattice steps."""
        coeffs = np.zeros(length)
        coeffs[0] = coefficient
        return cls(exponent, delta, coeffs, variable)

    def __len__(self):
        return self.coeffs.size

    def __repr__(self):
        terms = " + ".join(f"{c:.6g}*{self.variable}^{e:.6g}" for c, e in zip(self.coeffs, self.exponents))
        return f"PuiseuxSeries({terms} + O({self.variable}^{self.order:.6g}))"

    @property
    def exponents(self):
        return self.alpha + self.delta * np.arange(len(self))

    @property
    def order(self):
        """First exponent that is not known."""
        return self.alpha + self.delta * len(self)

    @property
    def leading(self):
        return float(self.coeffs[0])

    def _with(self, alpha, coeffs):
        return PuiseuxSeries(alpha, self.delta, coeffs, self.variable)

    def _offset(self, other):
        """Lattice steps from self.alpha to other.alpha."""
        if abs(self.delta - other.delta) > _LATTICE_TOL * max(self.delta, other.delta):
            raise LatticeMismatchError(f"lattice steps {self.delta:.6g} and {other.delta:.6g} differ")
        steps = (other.alpha - self.alpha) / self.delta
        if abs(steps - round(steps)) > 1e-7:
            raise LatticeMismatchError(
                f"exponents {self.alpha:.6g} and {other.alpha:.6g} are not on a common lattice of step {self.delta:.6g}"
            )
        return int(round(steps))

    def _constant_like(self, value):
        """The exact constant `value`, stored to the truncation order of self."""
        self._offset(PuiseuxSeries(0.0, self.delta, [1.0]))
        length = max(1, math.ceil(self.order / self.delta - _LATTICE_TOL))
        return PuiseuxSeries.monomial(0.0, length, self.delta, value, self.variable)

    def truncated(self, length):
        """Keeps the first `length` coefficients."""
        if length >= len(self):
            return self
        return self._with(self.alpha, self.coeffs[:length])

    def relabel(self, alpha, delta, variable):
        """Same coefficients read on another lattice, after a change of variable y = x**(delta/self.delta)."""
        return PuiseuxSeries(alpha, delta, self.coeffs, variable)

    def __add__(self, other):
        if not isinstance(other, PuiseuxSeries):
            other = self._constant_like(float(other))
        shift = self._offset(other)
        low, high = (self, other) if shift >= 0 else (other, self)
        shift = abs(shift)
        order = min(self.order, other.order)
        length = max(0, int(round((order - low.alpha) / self.delta)))
        coeffs = np.zeros(length)
        n = min(len(low), length)
        coeffs[:n] += low.coeffs[:n]
        if shift < length:
            n = min(len(high), length - shift)
            coeffs[shift:shift + n] += high.coeffs[:n]
        if length == 0:
            raise LatticeMismatchError("sum has no known coefficient")
        return PuiseuxSeries(low.alpha, self.delta, coeffs, self.variable)

    __radd__ = __add__

    def __neg__(self):
        return self._with(self.alpha, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return self._with(self.alpha, float(other) * self.coeffs)
        if abs(self.delta - other.delta) > _LATTICE_TOL * max(self.delta, other.delta):
            raise LatticeMismatchError(f"lattice steps {self.delta:.6g} and {other.delta:.6g} differ")
        length = min(len(self), len(other))
        coeffs = np.convolve(self.coeffs[:length], other.coeffs[:length])[:length]
        return PuiseuxSeries(self.alpha + other.alpha, self.delta, coeffs, self.variable)

    __rmul__ = __mul__

    def shift(self, exponent):
        """Multiplies by x**exponent."""
        return self._with(self.alpha + exponent, self.coeffs)

    def reciprocal(self):
        """1 / self, with 1/c_0 leading."""
        c0 = self.leading
        if c0 == 0.0:
            raise ValueError("reciprocal of a series with vanishing leading coefficient")
        f = self.coeffs
        g = np.zeros(len(self))
        g[0] = 1.0 / c0
        for k in range(1, len(self)):
            g[k] = -np.dot(f[1:k + 1], g[k - 1::-1]) / c0
        return self._with(-self.alpha, g)

    def power(self, beta):
        """
        self**beta by the J.C.P. Miller recurrence.

        g_k = 1/(k c_0) * sum_{j=1..k} ((beta + 1) j - k) c_j g_{k-j}.

        Args:
            beta (float): Real exponent.

        Returns:
            PuiseuxSeries: The power, with leading exponent beta * alpha.
        """
        c0 = self.leading
        integral = float(beta).is_integer()
        if c0 == 0.0 or (c0 < 0 and not integral):
            raise ValueError(f"power {beta:g} needs a {'nonzero' if integral else 'positive'} leading coefficient")
        f = self.coeffs
        g = np.zeros(len(self))
        g[0] = c0**beta
        for k in range(1, len(self)):
            j = np.arange(1, k + 1)
            g[k] = np.dot(((beta + 1.0) * j - k) * f[1:k + 1], g[k - 1::-1]) / (k * c0)
        return self._with(beta * self.alpha, g)

    def sqrt(self):
        return self.power(0.5)

    def tail_integral(self):
        """
        Term-wise integral from U to infinity in u, for a series in X = 1/u.

        X**e integrates to X**(e - 1)/(e - 1), which needs e > 1.

        Raises:
            SeriesResonanceError: A nonzero term has exponent e <= 1.
        """
        e = self.exponents
        bad = np.flatnonzero((e <= 1.0 + _LATTICE_TOL) & (self.coeffs != 0.0))
        if bad.size:
            k = int(bad[0])
            raise SeriesResonanceError("divergent term in tail integral", k, float(e[k]))
        with np.errstate(divide="ignore", invalid="ignore"):
            coeffs = np.where(self.coeffs != 0.0, self.coeffs / (e - 1.0), 0.0)
        return self._with(self.alpha - 1.0, coeffs)

    def antiderivative(self):
        """
        Term-wise indefinite integral in u, for a series in X = 1/u.

        X**e integrates to X**(e - 1)/(1 - e); the integration constant is dropped.

        Raises:
            SeriesResonanceError: A nonzero term has exponent 1 (a logarithm).
        """
        e = self.exponents
        bad = np.flatnonzero((np.abs(e - 1.0) <= _LATTICE_TOL) & (self.coeffs != 0.0))
        if bad.size:
            k = int(bad[0])
            raise SeriesResonanceError("logarithmic term in antiderivative", k, float(e[k]))
        with np.errstate(divide="ignore", invalid="ignore"):
            coeffs = np.where(self.coeffs != 0.0, self.coeffs / (1.0 - e), 0.0)
        return self._with(self.alpha - 1.0, coeffs)

    def derivative(self):
        """d/dx, term by term; a constant term leaves an exact zero in front."""
        return self._with(self.alpha - 1.0, self.coeffs * self.exponents)

    def compose(self, inner):
        """
        self(inner(y)) for a series self on the integer lattice.

        Args:
            inner (PuiseuxSeries): Series in y with a positive leading coefficient.

        Returns:
            PuiseuxSeries: The composition, in the variable of `inner`.
        """
        result = None
        for c, e in zip(self.coeffs, self.exponents):
            term = inner.power(e) * c
            result = term if result is None else result + term
        cap = inner.power(self.order)
        length = max(1, int(round((cap.alpha - result.alpha) / result.delta)))
        return result.truncated(length)

    def revert(self):
        """
        Series reversion of y = x * (e_0 + e_1 x + ...), solved for x(y).

        Fixed-point iteration x <- (y - sum_{k>=1} e_k x**(k+1)) / e_0 with the
        polynomial part evaluated by Horner's scheme; each sweep fixes one more
        coefficient.

        Returns:
            PuiseuxSeries: x as a series in y (variable "d").

        Raises:
            LatticeMismatchError: self is not of the form x * (power series in x).
        """
        if abs(self.alpha - 1.0) > _LATTICE_TOL or abs(self.delta - 1.0) > _LATTICE_TOL:
            raise LatticeMismatchError(f"reversion needs alpha = delta = 1, got {self.alpha:.6g}, {self.delta:.6g}")
        e0 = self.leading
        if e0 == 0.0:
            raise ValueError("reversion needs a nonzero linear term")
        length = len(self)
        y = PuiseuxSeries.monomial(1.0, length, variable="d")
        x = y * (1.0 / e0)
        for _ in range(length):
            x = (y - self._horner_tail(x)) * (1.0 / e0)
        return x

    def _horner_tail(self, x):
        """sum_{k>=1} e_k x**(k+1)."""
        square = x * x
        if len(self) == 1:
            return square * 0.0
        acc = None
        for c in self.coeffs[:0:-1]:
            acc = c + x * acc if acc is not None else x._constant_like(c)
        return square * acc

    def evaluate(self, x):
        """Numerical value of the stored terms at x > 0."""
        x = np.asarray(x, dtype=float)
        values = np.sum(self.coeffs * x[..., None] ** self.exponents, axis=-1)
        return values if values.ndim else float(values)


def series_add(s, t):
    return s + t


def series_mul(s, t):
    return s * t


def series_recip(s):
    return s.reciprocal()


def series_pow(s, beta):
    return s.power(beta)


def series_sqrt(s):
    return s.sqrt()


def series_integrate(s):
    return s.tail_integral()


def series_derivative(s):
    return s.derivative()


def series_compose_shift(s, inner=None, shift=0.0):
    """Optionally composes with `inner`, then multiplies by x**shift."""
    result = s.compose(inner) if inner is not None else s
    return result.shift(shift) if shift else result


def series_revert(s):
    return s.revert()
