import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.errors import TailModelError
from src.numerics.quadrature import TailDescriptor, TailKind

logger = logging.getLogger(__name__)


class TailFamily(Enum):
    POWER_LAW = "PowerLaw"
    EXPONENTIAL = "Exponential"
    NUMERIC_ONLY = "NumericOnly"
    CONSTANT = "Constant"

    @classmethod
    def parse(cls, name):
        for member in cls:
            if member.value.lower() == str(name).lower() or member.name.lower() == str(name).lower():
                return member
        raise TailModelError(f"unknown tail kind {name!r}")


# Integrands built from F whose tails are needed; each maps (c, s) of
# F ~ c*u^s to (amplitude, exponent) and (c, lam) of F ~ c*e^(lam*u) to
# (amplitude, rate).
_POWER_INTEGRANDS = {
    "inv_sqrt_2F": lambda c, s: ((2 * c) ** -0.5, s / 2),
    "inv_sqrt_F": lambda c, s: (c ** -0.5, s / 2),
    "inv_F": lambda c, s: (1 / c, s),
    "inv_2F_32": lambda c, s: ((2 * c) ** -1.5, 1.5 * s),
    "G_over_2F_32": lambda c, s: (1 / (2 * c) / (1 + s / 2), s - 1),
}
_EXPONENTIAL_INTEGRANDS = {
    "inv_sqrt_2F": lambda c, lam: ((2 * c) ** -0.5, lam / 2),
    "inv_sqrt_F": lambda c, lam: (c ** -0.5, lam / 2),
    "inv_F": lambda c, lam: (1 / c, lam),
    "inv_2F_32": lambda c, lam: ((2 * c) ** -1.5, 1.5 * lam),
    "G_over_2F_32": lambda c, lam: (1 / (2 * c) * 2 / lam, lam),
}


@dataclass(frozen=True)
class TailModel:
    """
    Analytic model of F beyond the cutoff.

    PowerLaw means F(u) ~ amplitude * u**s, Exponential means
    F(u) ~ amplitude * exp(lam * u), Constant means F(u) -> amplitude and
    NumericOnly carries no model at all.

    Attributes:
        kind (TailFamily): Model family.
        amplitude (float): c.
        exponent_or_rate (float): s or lam.
        cutoff (float): U_inf, beyond which the model is trusted.
        validation_tol (float): Allowed relative deviation |F/model - 1| beyond the cutoff.
    """

    kind: TailFamily
    amplitude: float = 1.0
    exponent_or_rate: float = 0.0
    cutoff: float = 1.0
    validation_tol: float = 1e-2

    def __post_init__(self):
        if not isinstance(self.kind, TailFamily):
            object.__setattr__(self, "kind", TailFamily.parse(self.kind))
        if self.kind is TailFamily.NUMERIC_ONLY:
            return
        if not self.amplitude > 0:
            raise TailModelError(f"{self.kind.value} tail needs a positive amplitude, got {self.amplitude}")
        if self.kind is TailFamily.POWER_LAW and not self.exponent_or_rate > 0:
            raise TailModelError(f"PowerLaw tail needs s > 0, got {self.exponent_or_rate}")
        if self.kind is TailFamily.EXPONENTIAL and not self.exponent_or_rate > 0:
            raise TailModelError(f"Exponential tail needs a positive rate, got {self.exponent_or_rate}")

    @classmethod
    def power_law(cls, amplitude, s, cutoff=1.0, validation_tol=1e-2):
        return cls(TailFamily.POWER_LAW, amplitude, s, cutoff, validation_tol)

    @classmethod
    def exponential(cls, amplitude, rate, cutoff=1.0, validation_tol=1e-2):
        return cls(TailFamily.EXPONENTIAL, amplitude, rate, cutoff, validation_tol)

    @classmethod
    def constant(cls, value, cutoff=1.0, validation_tol=1e-2):
        return cls(TailFamily.CONSTANT, value, 0.0, cutoff, validation_tol)

    @classmethod
    def numeric_only(cls, cutoff=1.0):
        return cls(TailFamily.NUMERIC_ONLY, 1.0, 0.0, cutoff)

    @classmethod
    def from_dict(cls, data):
        """Builds a model from the config file's `nonlinearity.tail` section."""
        kind = TailFamily.parse(data.get("kind", "NumericOnly"))
        if kind is TailFamily.NUMERIC_ONLY:
            return cls.numeric_only(float(data.get("cutoff", 1.0)))
        return cls(
            kind,
            float(data["amplitude"]),
            float(data.get("exponent_or_rate") or 0.0),
            float(data.get("cutoff", 1.0)),
            float(data.get("validation_tol", 1e-2)),
        )

    @property
    def analytic(self):
        return self.kind is not TailFamily.NUMERIC_ONLY

    def model(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind is TailFamily.POWER_LAW:
            return self.amplitude * u**self.exponent_or_rate
        if self.kind is TailFamily.EXPONENTIAL:
            with np.errstate(over="ignore"):
                return self.amplitude * np.exp(self.exponent_or_rate * u)
        if self.kind is TailFamily.CONSTANT:
            return np.full_like(u, self.amplitude)
        raise TailModelError("NumericOnly tails have no model.")

    def level_crossing(self, level):
        """Point beyond which the model exceeds `level` (inf when it never does)."""
        if self.kind is TailFamily.POWER_LAW:
            return (level / self.amplitude) ** (1.0 / self.exponent_or_rate)
        if self.kind is TailFamily.EXPONENTIAL:
            return math.log(level / self.amplitude) / self.exponent_or_rate
        return math.inf

    def validate(self, F, upper, samples=50):
        """
        Samples |F/model - 1| on [cutoff, upper].

        Args:
            F (callable): The function the model claims to describe.
            upper (float): Largest sample point.
            samples (int): Number of log-spaced samples.

        Raises:
            TailModelError: The deviation exceeds the validation tolerance.
        """
        if not self.analytic:
            return
        upper = max(upper, self.cutoff * 1.5 if self.cutoff > 0 else self.cutoff + 1.0)
        if self.cutoff > 0:
            points = np.geomspace(self.cutoff, upper, samples)
        else:
            points = np.linspace(self.cutoff, upper, samples)
        with np.errstate(over="ignore", invalid="ignore"):
            deviation = np.abs(np.asarray(F(points), dtype=float) / self.model(points) - 1.0)
        worst = int(np.nanargmax(np.where(np.isfinite(deviation), deviation, np.inf)))
        if not deviation[worst] <= self.validation_tol:
            raise TailModelError(
                f"{self.kind.value} tail deviates by {deviation[worst]:.3g} at u={points[worst]:.6g} "
                f"(tolerance {self.validation_tol:g})"
            )
        logger.debug(f"{self.kind.value} tail validated on [{self.cutoff:.6g}, {upper:.6g}]")

    def descriptor(self, integrand, ceiling=math.inf):
        """
        Tail descriptor of an integrand derived from F.

        Args:
            integrand (str): One of inv_sqrt_2F, inv_sqrt_F, inv_F, inv_2F_32, G_over_2F_32.
            ceiling (float): Largest safe evaluation point.

        Returns:
            TailDescriptor: Descriptor for `integrate_tail`.
        """
        cutoff = max(self.cutoff, 1e-300) if self.kind is TailFamily.POWER_LAW else self.cutoff
        tolerance = max(0.1, 10 * self.validation_tol)
        if self.kind is TailFamily.POWER_LAW:
            amplitude, decay = _POWER_INTEGRANDS[integrand](self.amplitude, self.exponent_or_rate)
            return TailDescriptor(TailKind.POWER, decay, amplitude, cutoff, ceiling, tolerance)
        if self.kind is TailFamily.EXPONENTIAL:
            amplitude, rate = _EXPONENTIAL_INTEGRANDS[integrand](self.amplitude, self.exponent_or_rate)
            return TailDescriptor(TailKind.EXPONENTIAL, rate, amplitude, cutoff, ceiling, tolerance)
        if self.kind is TailFamily.CONSTANT:
            # bounded F: every integrand of negative powers of F diverges
            return TailDescriptor(TailKind.POWER, 0.0, None, cutoff, ceiling, tolerance)
        return TailDescriptor(TailKind.NUMERIC, cutoff=cutoff, ceiling=ceiling)
