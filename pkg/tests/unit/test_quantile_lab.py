import math
import os
import sys

import numpy as np
import pytest
from unittest.mock import patch

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from core import quantile_lab as ql
from core.errors import DomainError
from core.lipschitz_functions import LinearFn
from core.measures import ExtremalMeasure, ExtremalParams, ParetoMeasure

ALPHA = 0.8
PARETO_CHEEGER = 4.0 ** -0.8


@pytest.fixture
def pareto_identity():
    mu = ParetoMeasure(5.0)
    return ql.empirical_quantile_from_function(ql.pushforward_quantile(mu, LinearFn([1.0])), 2048)


def test_pushforward_is_median_centered(pareto_identity):
    assert pareto_identity(0.5) == pytest.approx(0.0, abs=1e-15)
    assert pareto_identity(0.75) == pytest.approx(4.0 ** 0.25 - 2.0 ** 0.25)


def test_derivative_bound_is_saturated_by_pareto(pareto_identity):
    mid, ratios, slack = ql.quantile_derivative_ratios(pareto_identity, ALPHA, PARETO_CHEEGER)
    window = (mid >= 0.6) & (mid <= 0.99)
    assert ratios[window].min() >= 0.999
    assert (ratios / (1.0 + slack)).max() <= 1.0 + 1e-8
    report = ql.quantile_derivative_check(pareto_identity, ALPHA, PARETO_CHEEGER)
    assert report.passed


def test_derivative_check_needs_enough_cells():
    q = ql.empirical_quantile_from_function(lambda p: p, 16)
    with pytest.raises(DomainError):
        ql.quantile_derivative_check(q, ALPHA, 1.0)


def test_derivative_check_fails_for_a_steep_quantile():
    q = ql.empirical_quantile_from_function(lambda p: 100.0 * (p - 0.5), 512)
    assert not ql.quantile_derivative_check(q, ALPHA, PARETO_CHEEGER).passed


def test_integrated_tail_bound_is_nearly_attained_by_the_extremal_law():
    extremal = ExtremalMeasure(ExtremalParams(ALPHA, PARETO_CHEEGER))
    q = ql.empirical_quantile_from_function(extremal.quantile, 512)
    report = ql.ftc_tail_bound(q, ALPHA, PARETO_CHEEGER, 0.99)
    assert report.passed
    assert report.extras["ratio"] >= 0.5
    with pytest.raises(DomainError):
        ql.ftc_tail_bound(q, ALPHA, PARETO_CHEEGER, 0.4)


def test_samples_quantile_uses_order_statistics():
    q = ql.empirical_quantile_from_samples([4.0, 1.0, 3.0, 2.0], grid_size=4)
    assert np.allclose(q.values, [1.5, 2.5, 3.5])
    assert q.source["kind"] == "samples"


def test_quantile_must_be_nondecreasing():
    with pytest.raises(DomainError):
        ql.EmpiricalQuantile(grid=[0.25, 0.5, 0.75], values=[3.0, 2.0, 1.0])


def test_truncation():
    assert np.array_equal(ql.truncate_half([-2.0, 0.1, 0.9]), [-0.5, 0.1, 0.5])


def test_uncentered_quantile_is_rejected():
    q = ql.empirical_quantile_from_function(lambda p: p, 256)
    with pytest.raises(DomainError):
        ql.truncation_inequality_check(q, ALPHA, 1.0, 1.0, PARETO_CHEEGER)


def test_majorant_domain():
    assert ql.g_gamma_majorant(ALPHA, 2.0, 1.0, 0.5) > 0.0
    with pytest.raises(DomainError):
        ql.g_gamma_majorant(ALPHA, 2.0, 1.0, 0.25)


def test_half_mass_point_of_a_line():
    point = ql.half_mass_point(lambda x: x)
    assert point.mass == pytest.approx(1.0 / 8.0)
    assert point.p_value == pytest.approx(1.0 - 1.0 / math.sqrt(8.0), abs=1e-8)
    assert ql.half_mass_consistency(lambda x: x).passed


@pytest.mark.parametrize("scale", [1e-3, 7.0, 1e4])
def test_half_mass_point_ignores_positive_scaling(scale):
    g = lambda x: x ** 3 + x
    base = ql.half_mass_point(g)
    scaled = ql.half_mass_point(lambda x: scale * g(x))
    assert abs(scaled.p_value - base.p_value) <= 1e-10
    assert scaled.mass == pytest.approx(scale * base.mass, rel=1e-9)


def test_main_inequality_at_beta_one_is_half_the_mass():
    mu = ParetoMeasure(5.0)
    tail = lambda t: mu.tail(mu.median + t)
    report = ql.main_l2_inequality_check(tail, ALPHA, 1.0, 2.0, PARETO_CHEEGER)
    assert report.lhs == pytest.approx(0.5 * report.rhs, rel=1e-9)
    assert report.passed


def test_lemma_battery_passes():
    with patch('builtins.print') as mock_print:
        reports = ql.run_lemma_suite(grid_size=2048)
    assert len(reports) == 13
    failed = [r.label for r in reports if not r.passed]
    assert failed == []
    assert any("[LEMMAS] 13/13" in str(call) for call in mock_print.call_args_list)
