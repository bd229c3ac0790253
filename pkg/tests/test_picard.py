import numpy as np
import pytest

from src.errors import ConfigError, KellerOssermanError, NotContractingError, RadicandError
from src.nonlinearity.nonlinearity import make_custom
from src.nonlinearity.profile import leading_distance, leading_profile
from src.numerics.quadrature import integrate_finite
from src.nonlinearity.tail import TailModel
from src.numerics.grid import LogGrid
from src.phase_plane.shooting import error_term
from src.picard.fixed_point import asymptotic_gap, fixed_point, invert_uk, invert_uk_distance
from src.picard.iterate import PicardConfig, VIterate, apply_N, choose_U0, choose_Umax


def test_picard_config_validation():
    with pytest.raises(ConfigError):
        PicardConfig(rho=0.3)
    with pytest.raises(ConfigError):
        PicardConfig(tail_fraction=2.0)
    with pytest.raises(ConfigError):
        PicardConfig(max_iters=0)
    with pytest.raises(ConfigError):
        PicardConfig(refine_tol=0.0)
    with pytest.raises(ConfigError):
        PicardConfig(max_refinements=-1)


def test_choose_U0_rejects_large_rho(cubic):
    with pytest.raises(ConfigError):
        choose_U0(cubic, 3, 0.25)


def test_choose_U0_meets_both_conditions(cubic):
    rho = 0.2
    U0 = choose_U0(cubic, 3, rho)
    assert leading_distance(cubic, U0) / (1.0 - rho) <= 0.5
    u = U0 * np.geomspace(1.0, 1e6, 400)
    spread = 2.0 * 2 * (cubic.G(u) - cubic.G(U0)) / cubic.F(u)
    assert np.max(spread) <= rho * (1.0 + 1e-2)


def test_choose_Umax_meets_tail_fraction(cubic):
    U0 = 10.0
    Umax = choose_Umax(cubic, U0, 1e-5)
    assert leading_distance(cubic, Umax) <= 1e-5 * leading_distance(cubic, U0) * (1.0 + 1e-9)


def test_leading_iterate_reproduces_leading_profile(cubic):
    grid = LogGrid.build(10.0, 1e6, 32)
    v0 = VIterate.leading(cubic, grid)
    assert v0.deviation() == 0.0
    assert v0.distance(100.0) == pytest.approx(leading_distance(cubic, 100.0), rel=1e-10)
    assert invert_uk(v0, 0.999) == pytest.approx(leading_profile(cubic, 1e-3), rel=1e-9)
    assert invert_uk_distance(v0, 1e-8) == pytest.approx(leading_profile(cubic, 1e-8), rel=1e-9)
    with pytest.raises(ValueError):
        invert_uk(v0, 0.5)
    with pytest.raises(ValueError):
        invert_uk(v0, 1.0)


def test_apply_N_refuses_iterates_outside_the_ball(cubic):
    grid = LogGrid.build(10.0, 1e4, 32)
    far = VIterate(cubic, grid, np.full(len(grid), 1.5))
    with pytest.raises(NotContractingError):
        apply_N(far, cubic, 3, rho=0.2)


def test_apply_N_detects_negative_radicand(cubic):
    grid = LogGrid.build(2.0, 1e4, 32)
    with pytest.raises(RadicandError):
        apply_N(VIterate.leading(cubic, grid), cubic, 50)


def test_first_iterate_from_the_leading_profile(cubic):
    grid = LogGrid.build(10.0, 1e4, 32)
    v0 = VIterate.leading(cubic, grid)
    v1 = apply_N(v0, cubic, 3)
    assert np.all(v1.ratio <= 1.0)
    for i in (5, 40, 80):
        u = grid.nodes[i]
        outer = integrate_finite(lambda t: np.sqrt(2.0 * cubic.F(t)) / (1.0 - v0.distance(t)), grid.u0, u,
                                 cubic.spec)
        x = 2.0 * outer / float(cubic.F(u))
        assert v1.ratio[i] == pytest.approx(np.sqrt(1.0 - x), rel=1e-7)
        assert 0.5 * x <= 1.0 - v1.ratio[i] <= x


def test_derivative_of_the_inverse_is_the_iterate(cubic):
    grid = LogGrid.build(10.0, 1e6, 32)
    v1 = apply_N(VIterate.leading(cubic, grid), cubic, 3)
    d, h = 1e-3, 1e-7
    u = invert_uk_distance(v1, d)
    slope = (invert_uk_distance(v1, d - h) - invert_uk_distance(v1, d + h)) / (2.0 * h)
    assert slope == pytest.approx(float(v1.v(u)), rel=1e-5)
    assert invert_uk(v1, 1.0 - d) == pytest.approx(u, rel=1e-12)


def test_apply_N_in_one_dimension_is_the_identity(cubic):
    grid = LogGrid.build(10.0, 1e4, 32)
    v1 = apply_N(VIterate.leading(cubic, grid), cubic, 1)
    assert v1.k == 1
    assert np.all(v1.ratio == 1.0)


def test_one_dimension_converges_at_first_iteration(cubic):
    result = fixed_point(cubic, 1)
    assert result.converged_at == 1
    assert np.all(result.fixed_point.ratio == 1.0)
    assert result.residual == 0.0
    table = asymptotic_gap(result, 0, [1e-2, 1e-3, 1e-4], lambda d: leading_profile(cubic, d))
    assert table["ratio"].abs().max() <= 1e-8
    assert table["next_ratio"].abs().max() <= 1e-8


def test_fixed_point_refuses_without_keller_osserman():
    nl = make_custom("u", 1.0, TailModel.power_law(0.5, 2.0, cutoff=100.0))
    with pytest.raises(KellerOssermanError):
        fixed_point(nl, 3)


@pytest.mark.slow
def test_fixed_point_converges(cubic_picard):
    assert cubic_picard.converged_at is not None
    assert cubic_picard.residual < 1e-8
    assert cubic_picard.differences[-1] < 1e-10
    assert all(factor < 1.0 for factor in cubic_picard.contraction[:3])
    floor = 10 * cubic_picard.config.sup_tol
    pairs = zip(cubic_picard.contraction, cubic_picard.differences[1:])
    resolved = [kappa for kappa, diff in pairs if diff > floor]
    assert resolved and max(resolved) < 0.5
    assert all(it.deviation() <= cubic_picard.rho for it in cubic_picard.history)
    assert cubic_picard.fixed_point.deviation() <= cubic_picard.rho
    frame = cubic_picard.to_frame()
    assert set(frame.columns) == {"k", "u", "v_over_v0"}
    assert frame["k"].max() == len(cubic_picard.history) - 1


@pytest.mark.slow
def test_iterates_move_towards_the_solution(cubic_picard):
    d = 1e-3
    u0, u1, u2 = (invert_uk_distance(cubic_picard.iterate(k), d) for k in range(3))
    assert u0 < u1
    assert abs(u2 - u1) < abs(u1 - u0)


@pytest.mark.slow
def test_fixed_point_matches_phase_plane(cubic, cubic_picard, cubic_solution):
    g = error_term(cubic_solution)
    v = cubic_picard.fixed_point
    u = np.geomspace(10.0 * v.U0, v.Umax, 200)
    oracle = np.sqrt(2.0 * (cubic.F(u) - g(u)))
    assert np.max(np.abs(v.v(u) / oracle - 1.0)) <= 1e-4


@pytest.mark.slow
def test_asymptotic_gap_shrinks_with_k(cubic_picard, cubic_solution):
    distances = [1e-2, 1e-3, 1e-4]
    first = asymptotic_gap(cubic_picard, 0, distances, cubic_solution.u_at_distance)
    second = asymptotic_gap(cubic_picard, 1, distances, cubic_solution.u_at_distance)
    assert np.all(second["ratio"].abs() < first["ratio"].abs())


@pytest.mark.slow
def test_fixed_point_lies_between_the_first_iterates(cubic_picard):
    v0, v1, v = cubic_picard.history[0], cubic_picard.history[1], cubic_picard.history[-1]
    assert np.all(v1.ratio <= v.ratio + 1e-12)
    assert np.all(v.ratio <= v0.ratio)


@pytest.mark.slow
def test_grid_refinement_leaves_the_fixed_point_in_place(cubic, cubic_picard):
    v = cubic_picard.fixed_point
    assert cubic_picard.refinements
    assert cubic_picard.refinements[-1][1] < cubic_picard.config.refine_tol
    assert len(v.grid) > len(cubic_picard.history[0].grid)
    finer = fixed_point(cubic, 3, PicardConfig(grid_density=2 * v.grid.density, U0=cubic_picard.U0,
                                               max_refinements=0))
    assert finer.refinements == ()
    points = v.grid.oversampled()
    assert np.max(np.abs(finer.fixed_point.ratio_at(points) - v.ratio_at(points))) < 1e-6
