import logging
import math

import numpy as np
import pytest

from src.errors import BracketError, KellerOssermanError, LatticeMismatchError, SeriesResonanceError
from src.expansion.power_law import (
    LatticeCollision,
    collisions,
    leading_coefficient,
    power_law_expansion,
    residual_order,
    singular_term_count,
)
from src.expansion.puiseux import PuiseuxSeries, series_compose_shift, series_mul, series_recip, series_revert
from src.expansion.three_term import ThreeTermFormula, invert_three_term, three_term_table
from src.nonlinearity.nonlinearity import make_custom
from src.nonlinearity.profile import leading_profile
from src.nonlinearity.tail import TailModel
from src.picard.fixed_point import invert_uk, invert_uk_distance


def test_reciprocal_of_geometric_series_alternates():
    s = PuiseuxSeries(0.0, 1.0, [1.0, 1.0, 0.0, 0.0, 0.0])
    assert s.reciprocal().coeffs == pytest.approx([1.0, -1.0, 1.0, -1.0, 1.0])


def test_sqrt_and_integer_power():
    assert PuiseuxSeries(0.0, 1.0, [1.0, 2.0, 0.0]).sqrt().coeffs == pytest.approx([1.0, 1.0, -0.5])
    cube = PuiseuxSeries(0.0, 1.0, [1.0, 1.0, 0.0, 0.0]).power(3)
    assert cube.coeffs == pytest.approx([1.0, 3.0, 3.0, 1.0])


def test_reversion_gives_catalan_numbers():
    x = PuiseuxSeries(1.0, 1.0, [1.0, 1.0, 0.0, 0.0]).revert()
    assert x.alpha == 1.0
    assert x.coeffs == pytest.approx([1.0, -1.0, 2.0, -5.0])


def test_reversion_needs_linear_leading_term():
    with pytest.raises(LatticeMismatchError):
        PuiseuxSeries(2.0, 1.0, [1.0, 1.0]).revert()


def test_product_keeps_the_shorter_truncation():
    product = PuiseuxSeries(0.0, 1.0, [1.0, 1.0, 0.0]) * PuiseuxSeries(0.0, 1.0, [1.0, -1.0, 0.0, 0.0])
    assert len(product) == 3
    assert product.coeffs == pytest.approx([1.0, 0.0, -1.0])


def test_sum_aligns_exponents_on_the_lattice():
    s = PuiseuxSeries(-1.0, 1.0, [1.0, 2.0, 0.0])
    total = s + 1.0
    assert total.alpha == -1.0
    assert total.coeffs == pytest.approx([1.0, 3.0, 0.0])
    with pytest.raises(LatticeMismatchError):
        s + PuiseuxSeries(0.5, 1.0, [1.0])


def test_random_series_reciprocal_reversion_and_composition(rng):
    for _ in range(100):
        length = int(rng.integers(2, 9))
        coeffs = rng.uniform(-0.5, 0.5, size=length)
        coeffs[0] = rng.choice([-1.0, 1.0]) * rng.uniform(1.0, 2.0)
        identity = np.eye(1, length)[0]

        s = PuiseuxSeries(float(rng.integers(-3, 4)), 1.0, coeffs)
        unit = series_mul(s, series_recip(s))
        assert unit.alpha == 0.0
        assert unit.coeffs == pytest.approx(identity, abs=1e-10)

        t = PuiseuxSeries(1.0, 1.0, coeffs)
        inverse = series_revert(t)
        assert series_compose_shift(t, inverse).coeffs == pytest.approx(identity, abs=1e-9)
        assert inverse.compose(t).coeffs == pytest.approx(identity, abs=1e-9)


def test_compose_matches_closed_form():
    square = PuiseuxSeries(0.0, 1.0, [1.0, 2.0, 1.0, 0.0, 0.0])
    inner = PuiseuxSeries(1.0, 1.0, [1.0, 1.0, 0.0, 0.0, 0.0], "y")
    composed = series_compose_shift(square, inner)
    assert composed.alpha == 0.0
    assert composed.coeffs == pytest.approx([1.0, 2.0, 3.0, 2.0, 1.0])
    shifted = series_compose_shift(square, inner, shift=-2.0)
    assert shifted.alpha == -2.0
    assert shifted.coeffs == pytest.approx(composed.coeffs)
    assert len(series_compose_shift(square.truncated(3), inner)) == 3


def test_evaluate_and_order():
    s = PuiseuxSeries(-1.0, 1.0, [1.0, 2.0])
    assert s.evaluate(2.0) == pytest.approx(2.5)
    assert s.order == 1.0
    assert list(s.exponents) == [-1.0, 0.0]


def test_tail_integral_in_reciprocal_variable():
    cube = PuiseuxSeries.monomial(3.0, 2, variable="X")
    integral = cube.tail_integral()
    assert integral.alpha == 2.0
    assert integral.coeffs == pytest.approx([0.5, 0.0])
    with pytest.raises(SeriesResonanceError):
        PuiseuxSeries.monomial(1.0, 2, variable="X").tail_integral()


def test_antiderivative_refuses_logarithms():
    with pytest.raises(SeriesResonanceError):
        PuiseuxSeries.monomial(1.0, 1, variable="X").antiderivative()
    primitive = PuiseuxSeries.monomial(-2.0, 1, variable="X").antiderivative()
    assert primitive.alpha == -3.0
    assert primitive.coeffs == pytest.approx([1.0 / 3.0])


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 5.0, 9.0])
def test_leading_coefficient_matches_closed_form(p):
    expansion = power_law_expansion(p, 3)
    assert expansion.coefficients[0] == pytest.approx(leading_coefficient(p), rel=1e-12)


@pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 5.0])
def test_reverted_distance_reproduces_the_distance(p):
    assert power_law_expansion(p, 3).reversion_error < 1e-10


@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_square_coefficients(N):
    expansion = power_law_expansion(2.0, N)
    a1 = 6.0 * (N - 1) / 5.0
    a2 = ((N - 1) * (a1 + 12.0) - a1**2) / 12.0
    assert expansion.coefficients == pytest.approx([6.0, a1, a2], rel=1e-10, abs=1e-12)
    assert list(expansion.exponents) == [-2.0, -1.0, 0.0]


def test_cubic_second_coefficient():
    expansion = power_law_expansion(3.0, 3)
    assert expansion.coefficients == pytest.approx([math.sqrt(2.0), 2.0 / (3.0 * math.sqrt(2.0))], rel=1e-10)


def test_singular_term_count_on_random_exponents(rng):
    for p in 1.0 + rng.uniform(0.05, 8.0, size=20):
        K = singular_term_count(p) - 1
        m = 2.0 / (p - 1.0)
        assert K - m <= 1e-12
        assert K + 1 - m > 0


@pytest.mark.parametrize("p, count", [(1.5, 5), (2.0, 3), (3.0, 2), (4.0, 1), (5.0, 1)])
def test_singular_term_count_explicit(p, count):
    assert singular_term_count(p) == count
    assert power_law_expansion(p, 3).K == count - 1


def test_collisions():
    assert collisions(2.0) == (LatticeCollision(6, 4.0),)
    assert collisions(3.0) == (LatticeCollision(4, 3.0),)
    assert collisions(2.5) == ()


def test_collision_is_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="src.expansion.power_law"):
        expansion = power_law_expansion(3.0, 3)
    assert "LatticeCollision" in caplog.text
    assert expansion.collisions[0].index == 4


def test_order_beyond_obstruction_is_capped():
    expansion = power_law_expansion(3.0, 3, order=10)
    assert len(expansion.coefficients) == 4


@pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 5.0])
@pytest.mark.parametrize("N", [1, 3])
def test_truncated_expansion_solves_the_equation_to_its_order(p, N):
    expansion = power_law_expansion(p, N)
    assert residual_order(expansion) >= expansion.exponents[-1] - 1.0 - 1e-9


def test_expansion_evaluate_and_frame():
    expansion = power_law_expansion(2.0, 3)
    assert expansion.evaluate(0.1) == pytest.approx(600.0 + 24.0 + 1.92, rel=1e-10)
    assert expansion.evaluate(0.1, terms=1) == pytest.approx(600.0, rel=1e-12)
    frame = expansion.to_frame()
    assert list(frame.columns) == ["p", "N", "k", "exponent", "a_k"]
    assert len(frame) == 3


def test_power_law_expansion_rejects_bad_arguments():
    with pytest.raises(ValueError):
        power_law_expansion(1.0, 3)
    with pytest.raises(ValueError):
        power_law_expansion(2.0, 0)


def test_three_term_leading_and_first_correction(square):
    formula = ThreeTermFormula(square, 3)
    assert formula.R0(100.0) == pytest.approx(math.sqrt(6.0) / 10.0, rel=1e-12)
    assert formula.R1(100.0) == pytest.approx(0.012, rel=1e-8)
    flat = ThreeTermFormula(square, 1)
    assert flat.R1(100.0) == 0.0
    assert flat.R2(100.0) == 0.0


def test_three_term_second_correction_scaling(square):
    U = 1e4
    derived = ThreeTermFormula(square, 3).R2(U)
    assert derived * U**1.5 == pytest.approx(0.18 * 6.0**1.5, rel=0.05)
    assert ThreeTermFormula(square, 3, variant="displayed").R2(U) < 0


def test_three_term_rejects_unknown_variant(square):
    with pytest.raises(ValueError):
        ThreeTermFormula(square, 3, variant="other")


def test_three_term_lower_limit_shifts_first_correction(square):
    from_zero = ThreeTermFormula(square, 3).R1(100.0)
    from_one = ThreeTermFormula(square, 3, lower_limit=1.0).R1(100.0)
    assert from_one < from_zero
    assert from_one == pytest.approx(from_zero, rel=1e-3)


def test_three_term_table_and_inversion(square):
    table = three_term_table(square, 3, np.geomspace(100.0, 1e6, 5))
    assert table.finite
    assert np.all(np.diff(table.frame["total"]) < 0)
    U = invert_three_term(table, 0.9)
    assert table.formula.total(U) == pytest.approx(0.1, rel=1e-8)
    with pytest.raises(BracketError):
        invert_three_term(table, 0.5)
    with pytest.raises(BracketError):
        invert_three_term(table, 1.0 - 1e-5)


def test_three_term_refuses_without_keller_osserman():
    nl = make_custom("u", 1.0, TailModel.power_law(0.5, 2.0, cutoff=100.0))
    with pytest.raises(KellerOssermanError):
        ThreeTermFormula(nl, 3)


@pytest.mark.slow
def test_three_term_tracks_the_second_term(square, square_solution):
    d = 1e-3
    table = three_term_table(square, 3, np.geomspace(1e2, 1e8, 7))
    U = invert_three_term(table, 1.0 - d)
    u0 = leading_profile(square, d)
    ratio = (U - u0) / (square_solution.u_at_distance(d) - u0)
    assert 0.5 <= ratio <= 1.5


@pytest.mark.slow
def test_second_correction_matches_the_residual_of_the_solution(square, square_solution):
    formula = ThreeTermFormula(square, 3)
    d = 1e-3
    U = square_solution.u_at_distance(d)
    ratio = (d - formula.R0(U) - formula.R1(U)) / formula.R2(U)
    assert 0.5 <= ratio <= 1.5


@pytest.mark.slow
def test_second_correction_at_the_second_iterate(square, square_picard):
    formula = ThreeTermFormula(square, 3)
    v2 = square_picard.iterate(2)
    deviations = []
    for d in (1e-2, 1e-3, 1e-4):
        U = invert_uk_distance(v2, d)
        deviations.append(abs((d - formula.R0(U) - formula.R1(U)) / formula.R2(U) - 1.0))
    assert deviations[1] < deviations[0]
    assert max(deviations[1:]) < 1e-2


@pytest.mark.slow
def test_three_term_inversion_approaches_the_second_iterate(square, square_picard):
    table = three_term_table(square, 3, np.geomspace(1e3, 1e10, 8))
    v2 = square_picard.iterate(2)
    gaps = []
    for d in (1e-2, 1e-3, 1e-4):
        r = 1.0 - d
        gaps.append(abs(invert_three_term(table, r) / invert_uk(v2, r) - 1.0))
    assert gaps[1] < gaps[0] < 1e-5
    assert gaps[2] < 1e-8
