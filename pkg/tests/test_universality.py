import math

import numpy as np
import pandas as pd
import pytest

from src.errors import KellerOssermanError
from src.expansion.power_law import power_law_expansion
from src.nonlinearity.nonlinearity import make_custom, make_power
from src.nonlinearity.tail import TailModel
from src.phase_plane.shooting import solve_large_solution
from src.universality.criterion import (
    Universality,
    classify,
    closed_form_limit,
    phi,
    phi_along_profile,
    phi_power_closed_form,
    sampled_verdict,
)
from src.universality.gaps import second_term_gap, verify_one_term


@pytest.mark.parametrize("p, verdict", [
    (2.0, Universality.NON_UNIVERSAL),
    (3.0, Universality.NON_UNIVERSAL),
    (4.0, Universality.UNIVERSAL),
    (5.0, Universality.UNIVERSAL),
])
def test_classify_powers(p, verdict):
    report = classify(make_power(p), max_doublings=60)
    assert report.verdict is verdict
    assert report.closed_form_verdict is verdict
    assert report.sampled_verdict is verdict
    assert list(report.samples.columns) == ["u", "phi"]


def test_classify_exponential(exponential):
    report = classify(exponential)
    assert report.verdict is Universality.UNIVERSAL
    assert report.tail_limit == 0.0
    assert report.samples["u"].iloc[-1] < 500.0


def test_classify_refuses_without_keller_osserman():
    nl = make_custom("u", 1.0, TailModel.power_law(0.5, 2.0, cutoff=100.0))
    with pytest.raises(KellerOssermanError):
        classify(nl)


@pytest.mark.parametrize("s", [3.0, 3.9, 4.0, 4.1, 6.0, 10.0])
def test_closed_form_threshold_at_four(s):
    verdict, limit = closed_form_limit(make_power(s - 1.0))
    expected = Universality.UNIVERSAL if s > 4.0 else Universality.NON_UNIVERSAL
    assert verdict is expected
    if s < 4.0:
        assert limit == math.inf
    elif s == 4.0:
        assert limit == pytest.approx(math.sqrt(2.0) / 6.0, rel=1e-12)


@pytest.mark.parametrize("s", [3.0, 6.0, 10.0])
def test_sampled_verdict_agrees_away_from_the_threshold(s):
    report = classify(make_power(s - 1.0), max_doublings=60)
    assert report.sampled_verdict is report.closed_form_verdict


@pytest.mark.parametrize("s, verdict", [
    (3.9, Universality.NON_UNIVERSAL),
    (4.0, Universality.NON_UNIVERSAL),
    (4.1, Universality.UNIVERSAL),
])
def test_sampled_verdict_agrees_at_the_threshold(s, verdict):
    report = classify(make_power(s - 1.0))
    assert report.closed_form_verdict is verdict
    assert report.sampled_verdict is verdict
    assert report.verdict is verdict


def test_closed_form_decides_just_above_the_threshold():
    report = classify(make_power(3.01))
    assert report.closed_form_verdict is Universality.UNIVERSAL
    assert report.verdict is Universality.UNIVERSAL
    assert report.sampled_verdict is not Universality.UNIVERSAL
    assert "sampled" in report.detail


def test_closed_form_unknown_for_numeric_tails():
    nl = make_custom("u^3", 1.0, TailModel.numeric_only())
    verdict, limit = closed_form_limit(nl)
    assert verdict is None
    assert math.isnan(limit)


@pytest.mark.parametrize("p", [3.0, 5.0])
@pytest.mark.parametrize("u", [1.0, 10.0, 1e3])
def test_phi_matches_closed_form_for_powers(p, u):
    s = p + 1.0
    assert phi(make_power(p), u) == pytest.approx(phi_power_closed_form(1.0 / s, s, u), rel=1e-6)


def test_phi_diverges_below_quadratic_growth():
    nl = make_custom("u", 1.0, TailModel.power_law(0.5, 2.0, cutoff=100.0))
    assert phi(nl, 200.0) == math.inf


def _frame(u, values):
    return pd.DataFrame({"u": u, "phi": values})


def test_sampled_verdict_on_synthetic_samples():
    u = 2.0 ** np.arange(21)
    assert sampled_verdict(_frame(u, 1.0 / u)) is Universality.UNIVERSAL
    assert sampled_verdict(_frame(u, np.ones_like(u))) is Universality.NON_UNIVERSAL
    assert sampled_verdict(_frame(u, np.sqrt(u))) is Universality.NON_UNIVERSAL
    diverging = np.ones_like(u)
    diverging[-1] = math.inf
    assert sampled_verdict(_frame(u, diverging)) is Universality.NON_UNIVERSAL
    assert sampled_verdict(_frame(u[:2], 1.0 / u[:2])) is Universality.INCONCLUSIVE


def test_sampled_verdict_needs_two_decades():
    u = 2.0 ** np.arange(6)
    assert sampled_verdict(_frame(u, 1.0 / u**3)) is not Universality.UNIVERSAL


def test_phi_along_leading_profile_decreases(quintic):
    table = phi_along_profile(quintic, 3, 0, [1e-2, 1e-3, 1e-4])
    assert list(table.columns) == ["d", "u_k", "phi"]
    assert np.all(np.diff(table["phi"]) < 0)
    with pytest.raises(ValueError):
        phi_along_profile(quintic, 3, 2, [1e-2])


@pytest.mark.slow
def test_phi_along_first_iterate_decreases(quintic, quintic_picard):
    table = phi_along_profile(quintic, 3, 1, [1e-2, 1e-3, 1e-4], result=quintic_picard)
    assert np.all(np.diff(table["phi"]) < 0)


DISTANCES = [1e-2, 1e-3, 1e-4, 1e-5]


@pytest.mark.slow
def test_second_term_gap_persists_for_cubic(cubic, cubic_picard):
    gaps = second_term_gap(cubic, 3, DISTANCES, result=cubic_picard)
    assert gaps.liminf_positive
    frame = gaps.frame
    assert np.all(frame["gap"] > 0)
    a1 = power_law_expansion(3.0, 3).coefficients[1]
    assert frame["gap"].iloc[-1] == pytest.approx(a1, rel=0.05)


@pytest.mark.slow
def test_second_term_gap_vanishes_for_quintic(quintic, quintic_picard):
    gaps = second_term_gap(quintic, 3, DISTANCES, result=quintic_picard)
    assert not gaps.liminf_positive
    assert np.all(np.diff(gaps.frame["gap"]) < 0)


def test_second_term_gap_in_one_dimension_is_zero(cubic):
    gaps = second_term_gap(cubic, 1, DISTANCES)
    assert np.all(gaps.frame["gap"] == 0.0)
    assert not gaps.liminf_positive


@pytest.mark.slow
def test_one_term_bound_for_quintic(quintic, quintic_solution):
    table = verify_one_term(quintic, 3, [1e-2, 1e-3, 1e-4], oracle=quintic_solution.u_at_distance)
    assert table["ratio"].abs().max() <= 10.0
    assert np.all(np.diff(table["difference"]) < 0)


@pytest.mark.slow
def test_one_term_difference_persists_for_cubic(cubic, cubic_solution):
    table = verify_one_term(cubic, 3, [1e-2, 1e-3, 1e-4], oracle=cubic_solution.u_at_distance)
    a1 = 2.0 / (3.0 * math.sqrt(2.0))
    assert table["difference"].iloc[1] == pytest.approx(a1, rel=0.05)
    assert table["difference"].iloc[-1] >= 0.5 * a1


SOLUTIONS = {2.0: "square_solution", 3.0: "cubic_solution", 5.0: "quintic_solution"}


@pytest.mark.slow
@pytest.mark.parametrize("p", [2.0, 3.0, 4.0, 5.0])
def test_classify_agrees_with_the_one_term_difference(request, p):
    nl = make_power(p)
    solution = request.getfixturevalue(SOLUTIONS[p]) if p in SOLUTIONS else solve_large_solution(nl, 3)
    table = verify_one_term(nl, 3, [1e-2, 1e-3, 1e-4], oracle=solution.u_at_distance)
    difference = table["difference"].abs().to_numpy()
    vanishing = bool(np.all(np.diff(difference) < 0) and difference[-1] < 0.5 * difference[0])
    assert (classify(nl, max_doublings=60).verdict is Universality.UNIVERSAL) is vanishing
