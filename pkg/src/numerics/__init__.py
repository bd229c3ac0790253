from src.numerics.grid import LogGrid
from src.numerics.interpolation import monotone_interpolant
from src.numerics.quadrature import (
    DEFAULT_SPEC,
    CumulativeIntegral,
    QuadratureSpec,
    TailDescriptor,
    TailKind,
    gauss_legendre,
    integrate_cells,
    integrate_finite,
    integrate_tail,
)
from src.numerics.roots import expand_bracket, invert_monotone
