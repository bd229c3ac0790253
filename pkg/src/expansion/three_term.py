import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from src.errors import BracketError, KellerOssermanError
from src.nonlinearity.antiderivative import antiderivative_G
from src.nonlinearity.conditions import keller_osserman
from src.nonlinearity.profile import leading_distance
from src.nonlinearity.tail import TailFamily
from src.numerics.quadrature import CumulativeIntegral, TailDescriptor, TailKind, integrate_tail
from src.numerics.roots import invert_monotone

logger = logging.getLogger(__name__)

VARIANTS = ("derived", "displayed")


class ThreeTermFormula:
    """
    Implicit three-term formula 1 - r = R0(u2) + R1(u2) + R2(u2) (1 + o(1)).

    With V = sqrt(2F), G = int_L^u V, P = int_L^u V(t) R0(t) dt and
    Q = int_L^u G/V (L the lower limit):

        R0(U) = int_U^inf du / V
        R1(U) = (N-1) int_U^inf G / V**3 du
        R2(U) = (N-1) int_U^inf (P - (N-1) Q + 3/2 (N-1) G**2 / V**2) / V**3 du

    which is the expansion of int_U^inf du / v2 to second order in the
    correction. The "displayed" variant evaluates the alternative bracket
    -(N-1) Q - G(u) R0(u) + 5/4 (N-1) G**2 / V**2 for comparison.

    Args:
        nl (Nonlinearity): The nonlinearity (Keller-Osserman must hold).
        N (int): Dimension.
        lower_limit (float): Lower limit L of the inner integrals, defaults to a.
        variant (str): "derived" or "displayed".
    """

    def __init__(self, nl, N, lower_limit=None, variant="derived"):
        if variant not in VARIANTS:
            raise ValueError(f"unknown three-term variant {variant!r}, expected one of {VARIANTS}")
        report = keller_osserman(nl)
        if not report.holds:
            raise KellerOssermanError(f"Keller-Osserman condition {report.verdict.value} for {nl.label}")
        self.nl = nl
        self.N = int(N)
        self.variant = variant
        self.lower_limit = nl.a if lower_limit is None else float(lower_limit)
        self.G = antiderivative_G(nl, self.lower_limit)
        self.spec = dataclasses.replace(nl.spec, rel_tol=max(nl.spec.rel_tol, 1e-10))
        self._inner = None
        if self.N > 1:
            self._inner = CumulativeIntegral(self._inner_integrand, self.lower_limit,
                                             top=min(nl.ceiling / 2.0, 1e6), spec=self.spec)

    def _leading(self, t):
        return leading_distance(self.nl, t) if t > self.nl.a else math.inf

    def _inner_integrand(self, t):
        t = np.asarray(t, dtype=float)
        V = np.sqrt(2.0 * np.maximum(self.nl.F(t), 0.0))
        positive = V > 0
        safe_t = np.where(positive, t, self.lower_limit + 1.0)
        safe_V = np.where(positive, V, 1.0)
        q_part = -(self.N - 1) * self.G(safe_t) / safe_V
        if self.variant == "derived":
            values = safe_V * np.vectorize(self._leading, otypes=[float])(safe_t) + q_part
        else:
            values = q_part
        return np.where(positive, values, 0.0)

    def _remainder_descriptor(self):
        tail = self.nl.tail
        cutoff = max(tail.cutoff, self.lower_limit)
        if tail.kind is TailFamily.POWER_LAW:
            return TailDescriptor(TailKind.POWER, 1.5 * tail.exponent_or_rate - 2.0, None, cutoff, self.nl.ceiling)
        if tail.kind is TailFamily.EXPONENTIAL:
            return TailDescriptor(TailKind.EXPONENTIAL, 1.5 * tail.exponent_or_rate, None, cutoff, self.nl.ceiling)
        if tail.kind is TailFamily.CONSTANT:
            return TailDescriptor(TailKind.POWER, 0.0, None, cutoff, self.nl.ceiling)
        return TailDescriptor(TailKind.NUMERIC, cutoff=cutoff, ceiling=self.nl.ceiling)

    def _second_order_integrand(self, u):
        u = np.asarray(u, dtype=float)
        two_F = 2.0 * np.asarray(self.nl.F(u), dtype=float)
        G = self.G(u)
        if self.variant == "derived":
            bracket = self._inner(u) + 1.5 * (self.N - 1) * G**2 / two_F
        else:
            R0 = np.vectorize(self._leading, otypes=[float])(u)
            bracket = self._inner(u) - G * R0 + 1.25 * (self.N - 1) * G**2 / two_F
        return bracket / two_F**1.5

    def R0(self, U):
        return leading_distance(self.nl, U)

    def R1(self, U):
        if self.N == 1:
            return 0.0

        def integrand(u):
            return self.G(u) / (2.0 * np.asarray(self.nl.F(u), dtype=float)) ** 1.5

        descriptor = self.nl.descriptor("G_over_2F_32")
        if self.lower_limit != self.nl.a:
            descriptor = dataclasses.replace(descriptor, amplitude=None)
        return (self.N - 1) * integrate_tail(integrand, float(U), descriptor, self.spec)

    def R2(self, U):
        if self.N == 1:
            return 0.0
        value = integrate_tail(self._second_order_integrand, float(U), self._remainder_descriptor(), self.spec)
        return (self.N - 1) * value

    def total(self, U):
        return self.R0(U) + self.R1(U) + self.R2(U)


@dataclass(frozen=True, eq=False)
class ThreeTermTable:
    """
    R0, R1 and R2 on a grid of U values.

    Attributes:
        formula (ThreeTermFormula): Evaluator the table was built from.
        frame (pd.DataFrame): Columns U, R0, R1, R2, total.
        diagnosis (str): Empty, or why a term diverged.
    """

    formula: ThreeTermFormula
    frame: pd.DataFrame
    diagnosis: str = ""

    @property
    def U_range(self):
        return float(self.frame["U"].min()), float(self.frame["U"].max())

    @property
    def finite(self):
        return not self.diagnosis


def three_term_table(nl, N, U_grid, lower_limit=None, variant="derived"):
    """
    Tabulates the three terms of the implicit boundary formula.

    Args:
        nl (Nonlinearity): The nonlinearity (Keller-Osserman must hold).
        N (int): Dimension.
        U_grid (array-like): Increasing U values above the threshold.
        lower_limit (float): Lower limit of the inner integrals (defaults to a).
        variant (str): "derived" or "displayed".

    Returns:
        ThreeTermTable: The table; a divergent R1 or R2 is reported as inf with a diagnosis.
    """
    formula = ThreeTermFormula(nl, N, lower_limit, variant)
    U = np.asarray(U_grid, dtype=float)
    if U.size == 0 or np.any(np.diff(U) <= 0):
        raise ValueError("U grid must be non-empty and increasing")
    rows = []
    for value in U:
        R0, R1, R2 = formula.R0(value), formula.R1(value), formula.R2(value)
        rows.append({"U": value, "R0": R0, "R1": R1, "R2": R2, "total": R0 + R1 + R2})
    frame = pd.DataFrame(rows)
    diagnosis = ""
    divergent = [name for name in ("R1", "R2") if not np.all(np.isfinite(frame[name]))]
    if divergent:
        diagnosis = f"{', '.join(divergent)} diverge for {nl.label}: F grows too slowly for the correction integrals"
        logger.warning(diagnosis)
    return ThreeTermTable(formula, frame, diagnosis)


def invert_three_term(table, r):
    """
    Solves 1 - r = R0(U) + R1(U) + R2(U) for U within the table range.

    Args:
        table (ThreeTermTable): Table whose range brackets the solution.
        r (float): Radius in (0, 1).

    Returns:
        float: U, an approximation of u2(r).

    Raises:
        BracketError: 1 - r lies outside the range of the table, or the table diverges.
    """
    if not table.finite:
        raise BracketError(f"three-term formula unavailable: {table.diagnosis}")
    d = 1.0 - r
    lo, hi = table.U_range
    totals = table.frame["total"]
    if not (0.0 < d and float(totals.min()) <= d <= float(totals.max())):
        raise BracketError(f"1 - r = {d:.6g} outside the table range [{totals.min():.6g}, {totals.max():.6g}]")
    formula = table.formula
    a = formula.nl.a

    def log_total(y):
        return math.log(formula.total(a + math.exp(y)))

    y = invert_monotone(log_total, math.log(d), (math.log(lo - a), math.log(hi - a)), tol=1e-9, expand=False)
    return float(a + math.exp(y))
