import numpy as np

from src.numerics.quadrature import CumulativeIntegral


class GEvaluator:
    """
    G(u) = integral of sqrt(2F) from a lower limit to u.

    The underlying antiderivative (closed form or tabulated from a) is shared
    between evaluators that only differ by their lower limit.

    Args:
        nl (Nonlinearity): Owner of F.
        lower_limit (float): Lower integration limit, defaults to a.
        base (callable): Antiderivative based at a; tabulated when omitted.
    """

    def __init__(self, nl, lower_limit=None, base=None):
        self.nl = nl
        self.lower_limit = nl.a if lower_limit is None else float(lower_limit)
        if base is None:
            base = CumulativeIntegral(self.derivative, nl.a, top=min(nl.ceiling, 1e8), spec=nl.spec)
        self._base = base
        self._offset = float(base(self.lower_limit)) if self.lower_limit != nl.a else 0.0

    def derivative(self, u):
        """G' = sqrt(2F), clipped at zero below the threshold."""
        return np.sqrt(2.0 * np.maximum(self.nl.F(u), 0.0))

    def __call__(self, u):
        value = self._base(u)
        return value - self._offset

    def with_lower_limit(self, lower_limit):
        """Evaluator of the same antiderivative with another lower limit."""
        return GEvaluator(self.nl, lower_limit, self._base)


def antiderivative_G(nl, lower_limit=None):
    """
    Cached evaluator of G(u) = int_{lower_limit}^u sqrt(2F(t)) dt.

    Args:
        nl (Nonlinearity): The nonlinearity.
        lower_limit (float): Defaults to the threshold a.

    Returns:
        GEvaluator: The evaluator; G(lower_limit) = 0.
    """
    if lower_limit is None or lower_limit == nl.a:
        return nl.G
    return nl.G.with_lower_limit(lower_limit)
