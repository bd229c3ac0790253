import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class LogGrid:
    """
    Geometrically spaced nodes from U0 to Umax.

    Spacing is geometric in the offset ``u - origin`` so that grids starting
    at or below zero (a shifted threshold) remain valid.

    Attributes:
        nodes (np.ndarray): Strictly increasing, read-only node array; nodes[0] == U0.
        density (float): Points per decade of the offset.
        origin (float): Offset origin.
    """

    nodes: np.ndarray
    density: float
    origin: float = 0.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("LogGrid needs at least two nodes.")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("LogGrid nodes must be strictly increasing.")
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def build(cls, u0, umax, density, origin=0.0):
        """
        Builds a grid covering [u0, umax].

        Args:
            u0 (float): First node.
            umax (float): Last node (must exceed u0).
            density (float): Points per decade.
            origin (float): Spacing is geometric in ``u - origin``; requires u0 > origin.

        Returns:
            LogGrid: The grid.
        """
        if not umax > u0 > origin:
            raise ValueError(f"LogGrid needs umax > u0 > origin, got {umax}, {u0}, {origin}.")
        if density <= 0:
            raise ValueError("LogGrid density must be positive.")
        decades = math.log10((umax - origin) / (u0 - origin))
        count = max(2, int(math.ceil(decades * density)) + 1)
        nodes = origin + np.geomspace(u0 - origin, umax - origin, count)
        nodes[0] = u0
        nodes[-1] = umax
        return cls(nodes, float(density), float(origin))

    @property
    def u0(self):
        return float(self.nodes[0])

    @property
    def umax(self):
        return float(self.nodes[-1])

    def __len__(self):
        return self.nodes.size

    def refined(self, factor=2):
        """Same span with `factor` times the density."""
        return LogGrid.build(self.u0, self.umax, self.density * factor, self.origin)

    def oversampled(self, per_cell=4):
        """
        Nodes plus `per_cell` interior points per cell, used for sup-norm checks.

        Returns:
            np.ndarray: Sorted sample points.
        """
        lo = self.nodes[:-1] - self.origin
        hi = self.nodes[1:] - self.origin
        fractions = np.arange(1, per_cell + 1) / (per_cell + 1)
        inner = self.origin + lo[:, None] * (hi / lo)[:, None] ** fractions[None, :]
        return np.sort(np.concatenate([self.nodes, inner.ravel()]))
