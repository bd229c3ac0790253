import math

import numpy as np
import pytest

from src.errors import BracketError, NumericalError, TailModelError
from src.numerics.grid import LogGrid
from src.numerics.interpolation import monotone_interpolant
from src.numerics.quadrature import (
    CumulativeIntegral,
    QuadratureSpec,
    TailDescriptor,
    TailKind,
    integrate_cells,
    integrate_finite,
    integrate_tail,
)
from src.numerics.roots import expand_bracket, invert_monotone


@pytest.mark.parametrize("g, lo, hi, expected", [
    (lambda t: t**3, 0.0, 1.0, 0.25),
    (lambda t: 3 * t**2 - 2 * t + 1, -1.0, 2.0, 9.0),
    (lambda t: t**-0.5, 0.0, 1.0, 2.0),
    (lambda t: np.log(t), 0.0, 1.0, -1.0),
    (lambda t: (1.0 - t) ** -0.5, 0.0, 1.0, 2.0),
    (lambda t: np.exp(-t), 0.0, 10.0, 1.0 - math.exp(-10.0)),
    (lambda t: np.exp(t), 0.0, 1.0, math.e - 1.0),
    (lambda t: 1.0 / (1.0 + t**2), 0.0, 1.0, math.pi / 4),
    (lambda t: np.sqrt(1.0 - t**2), -1.0, 1.0, math.pi / 2),
])
def test_integrate_finite_closed_forms(g, lo, hi, expected):
    assert integrate_finite(g, lo, hi) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_integrate_finite_empty_and_reversed_intervals():
    assert integrate_finite(np.exp, 2.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        integrate_finite(np.exp, 2.0, 1.0)


def test_quadrature_spec_rejects_bad_tolerances():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=5)


@pytest.mark.parametrize("g, lo, descriptor, expected", [
    (lambda t: t**-3.0, 1.0, TailDescriptor(TailKind.POWER, 3.0, 1.0, 1.0), 0.5),
    (lambda t: t**-3.0, 0.5, TailDescriptor(TailKind.POWER, 3.0, 1.0, 1.0), 2.0),
    (lambda t: 1.0 / (t * (t + 1.0)), 1.0, TailDescriptor(TailKind.POWER, 2.0), math.log(2.0)),
    (lambda t: np.exp(-2.0 * t), 0.0, TailDescriptor(TailKind.EXPONENTIAL, 2.0, 1.0, 0.0), 0.5),
    (lambda t: np.exp(-t) * (1.0 + np.exp(-t)), 0.0, TailDescriptor(TailKind.EXPONENTIAL, 1.0, cutoff=0.0), 1.5),
    (lambda t: 1.0 / (1.0 + t**2), 0.0, TailDescriptor(TailKind.NUMERIC), math.pi / 2),
])
def test_integrate_tail_closed_forms(g, lo, descriptor, expected):
    assert integrate_tail(g, lo, descriptor) == pytest.approx(expected, rel=1e-9)


def test_integrate_tail_reports_divergence():
    assert integrate_tail(lambda t: 1.0 / t, 1.0, TailDescriptor(TailKind.POWER, 1.0)) == math.inf


def test_integrate_tail_rejects_wrong_descriptor():
    with pytest.raises(TailModelError):
        integrate_tail(lambda t: t**-3.0, 1.0, TailDescriptor(TailKind.POWER, 2.0))


def test_integrate_cells_is_exact_for_polynomials():
    lo = np.array([0.0, 1.0, 2.0])
    hi = np.array([1.0, 2.0, 4.0])
    cells = integrate_cells(lambda t: t**5, lo, hi)
    assert cells == pytest.approx((hi**6 - lo**6) / 6.0, rel=1e-13)


def test_cumulative_integral_matches_antiderivative():
    table = CumulativeIntegral(lambda t: 2.0 * t, 0.0, top=100.0)
    assert table(0.5) == pytest.approx(0.25, rel=1e-12)
    assert table(5.0) == pytest.approx(25.0, rel=1e-12)
    values = table(np.array([10.0, 1e3, 1e5]))
    assert values == pytest.approx([1e2, 1e6, 1e10], rel=1e-10)
    assert table.top >= 1e5


def test_cumulative_integral_below_base_is_negative():
    table = CumulativeIntegral(lambda t: np.ones_like(t), 1.0, top=10.0)
    assert table(0.5) == pytest.approx(-0.5, rel=1e-12)


def test_invert_monotone_expands_bracket():
    root = invert_monotone(lambda x: x**3, 8.0, (0.0, 1.0))
    assert root == pytest.approx(2.0, rel=1e-14)


def test_invert_monotone_decreasing_function():
    root = invert_monotone(lambda x: math.exp(-x), 0.25, (0.0, 1.0))
    assert root == pytest.approx(math.log(4.0), rel=1e-14)


def test_invert_monotone_without_expansion_raises():
    with pytest.raises(BracketError):
        invert_monotone(lambda x: x, 5.0, (0.0, 1.0), expand=False)


def test_invert_monotone_reports_a_jump_it_cannot_close():
    with pytest.raises(NumericalError):
        invert_monotone(lambda x: x if x < 1.0 else x + 1.0, 1.5, (0.0, 3.0))


def test_expand_bracket_respects_domain():
    lo, hi = expand_bracket(lambda x: math.log(x), -10.0, 0.5, 1.0, domain=(0.0, math.inf))
    assert 0.0 < lo <= math.exp(-10.0) <= hi


def test_expand_bracket_gives_up():
    with pytest.raises(BracketError):
        expand_bracket(lambda x: 1.0, 0.0, 0.0, 1.0, max_expansions=5)


def test_monotone_interpolant_is_exact_and_shape_preserving():
    xs = np.array([0.0, 1.0, 2.0, 3.0, 10.0])
    ys = np.array([0.0, 0.1, 5.0, 5.0, 6.0])
    h = monotone_interpolant(xs, ys)
    assert h(xs) == pytest.approx(ys)
    samples = h(np.linspace(0.0, 10.0, 501))
    assert np.all(np.diff(samples) >= -1e-12)
    assert np.isnan(h(11.0))


def test_monotone_interpolant_rejects_non_monotone_data():
    with pytest.raises(ValueError):
        monotone_interpolant([0.0, 1.0, 2.0], [0.0, 1.0, 0.5])
    with pytest.raises(ValueError):
        monotone_interpolant([0.0, 0.0, 2.0], [0.0, 1.0, 2.0])


def test_log_grid_is_geometric_in_the_offset():
    grid = LogGrid.build(2.0, 1002.0, 10, origin=1.0)
    assert grid.u0 == 2.0 and grid.umax == 1002.0
    ratios = np.diff(np.log(grid.nodes - 1.0))
    assert ratios == pytest.approx(np.full_like(ratios, ratios[0]), rel=1e-9)
    refined = grid.refined()
    assert len(refined) > len(grid) and refined.umax == grid.umax
    assert not grid.nodes.flags.writeable


def test_log_grid_oversampling_stays_inside():
    grid = LogGrid.build(1.0, 100.0, 4)
    points = grid.oversampled(per_cell=3)
    assert points.size == len(grid) + 3 * (len(grid) - 1)
    assert points[0] == 1.0 and points[-1] == 100.0
    assert np.all(np.diff(points) > 0)


def test_log_grid_rejects_bad_spans():
    with pytest.raises(ValueError):
        LogGrid.build(10.0, 1.0, 8)
    with pytest.raises(ValueError):
        LogGrid.build(1.0, 10.0, 8, origin=1.0)
