"""
Exception hierarchy shared by every module.

Library code raises these; only the command line maps them to exit codes.
"""


class BlowupError(Exception):
    """Root of all errors raised by the package."""


class ConfigError(BlowupError, ValueError):
    """Invalid or unreadable run configuration."""


class ExpressionSyntaxError(BlowupError, ValueError):
    """
    Malformed nonlinearity expression.

    Args:
        message (str): Human readable description.
        position (int): Zero-based character offset of the offending token.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class PositivityError(BlowupError, ValueError):
    """f fails the positivity condition; `witness` is the sampled point."""

    def __init__(self, message, witness):
        super().__init__(f"{message} (witness t={witness!r})")
        self.witness = witness


class TailModelError(BlowupError, ValueError):
    """A tail model is malformed or does not describe the function it claims to."""


class KellerOssermanError(BlowupError, ValueError):
    """Raised when a computation needs the Keller-Osserman condition and it fails."""


class NumericalError(BlowupError, RuntimeError):
    """Base class for numerical failures (exit code 70)."""


class QuadratureError(NumericalError):
    """
    Adaptive quadrature exhausted its subdivision budget.

    Args:
        message (str): Solver message.
        worst_interval (tuple): (lo, hi, error estimate) of the worst subinterval.
    """

    def __init__(self, message, worst_interval=None):
        detail = ""
        if worst_interval is not None:
            lo, hi, err = worst_interval
            detail = f"; worst interval [{lo:.6g}, {hi:.6g}] with error {err:.3g}"
        super().__init__(f"{message}{detail}")
        self.worst_interval = worst_interval


class BracketError(NumericalError):
    """No sign change could be bracketed for a monotone inversion or a shooting."""


class ProfileTerminatedError(NumericalError):
    """F - g reached zero: the start is not on a blow-up trajectory."""

    def __init__(self, message, u):
        super().__init__(f"profile terminated: {message} (u={u:.6g})")
        self.u = u


class RadicandError(NumericalError):
    """Negative radicand in the Picard map; U0 is too small."""


class NotContractingError(NumericalError):
    """Picard iterates failed to contract."""

    def __init__(self, message, factors):
        super().__init__(message)
        self.factors = list(factors)


class SeriesResonanceError(NumericalError):
    """
    A term-wise integration hit a logarithmic exponent.

    Args:
        index (int): Lattice index of the offending term.
        exponent (float): Exponent of the offending term.
    """

    def __init__(self, message, index, exponent):
        super().__init__(f"{message} (index {index}, exponent {exponent:.6g})")
        self.index = index
        self.exponent = exponent


class LatticeMismatchError(NumericalError):
    """Two series live on incompatible exponent lattices."""
