import math
import os
import sys

import pytest
from unittest.mock import patch

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from core import constants, experiments
from core.errors import DomainError
from core.measures import LaplaceMeasure, ParetoMeasure
from core.reports import EQUALITY, PASS, UPPER

COMMON = dict(samples=4000, batches=8)


@pytest.fixture
def pareto_certified():
    bound = constants.pareto_cheeger_bound(5.0)
    return bound.inputs.alpha, bound.value


@pytest.fixture(autouse=True)
def quiet():
    with patch('builtins.print'):
        yield


def test_pareto_theorem_small_dimensions():
    result = experiments.verify_pareto_theorem(5.0, [4, 16], seed=3, **COMMON)
    bounds = [r for r in result.reports if r.theorem_id in ("pareto_theorem_1d", "pareto_theorem")]
    assert len(bounds) == 3
    assert all(r.verdict == PASS for r in bounds)
    assert [row[0] for row in result.plot_rows] == [4, 16]
    assert result.summary["exponent"] == pytest.approx(0.5)
    assert "slope" in result.summary


def test_pareto_theorem_domain():
    with pytest.raises(DomainError):
        experiments.verify_pareto_theorem(3.0, [4])
    with pytest.raises(DomainError):
        experiments.verify_pareto_theorem(5.0, [0, 4])


def test_product_theorem(pareto_certified):
    alpha, cheeger = pareto_certified
    certificate = constants.l2_certificate(alpha, cheeger)
    result = experiments.verify_product_theorem(ParetoMeasure(5.0), certificate, "max", 4, seed=5, **COMMON)
    report = result.reports[0]
    assert report.verdict == PASS
    assert report.extras["gradient_moment"] == pytest.approx(1.0)


def test_product_theorem_rejects_other_certificates(pareto_certified):
    alpha, cheeger = pareto_certified
    with pytest.raises(DomainError):
        experiments.verify_product_theorem(ParetoMeasure(5.0), constants.l1_certificate(alpha, 2.0, cheeger),
                                           "max", 4)
    with pytest.raises(DomainError):
        experiments.verify_product_theorem(ParetoMeasure(5.0), None, "max", 4)


def test_dp_theorem(pareto_certified):
    alpha, cheeger = pareto_certified
    certificate = constants.l1_certificate(alpha, 2.0, cheeger)
    result = experiments.verify_dp_theorem(ParetoMeasure(5.0), certificate, 1.5, "scaled_sum", 4, seed=9, **COMMON)
    assert result.reports[0].verdict == PASS
    assert result.reports[0].config["kind"] == "C1"


def test_dp_theorem_c2_branch_needs_p_at_most_two(pareto_certified):
    alpha, cheeger = pareto_certified
    certificate = constants.l2_certificate(alpha, cheeger)
    with pytest.raises(DomainError):
        experiments.verify_dp_theorem(ParetoMeasure(5.0), certificate, 3.0, "scaled_sum", 4)


def test_tails_switch_to_equality_where_attained():
    result = experiments.verify_tail_bounds(LaplaceMeasure(1.0), 1.0, 1.0, [0.5, 1.0], seed=2, **COMMON)
    assert len(result.reports) == 4
    assert {r.mode for r in result.reports} == {EQUALITY}
    for report in result.reports:
        t = report.config["threshold"]
        assert report.extras["exact_tail"] == pytest.approx(0.5 * math.exp(-t))


def test_pareto_tails_are_upper_bounds(pareto_certified):
    alpha, cheeger = pareto_certified
    result = experiments.verify_tail_bounds(ParetoMeasure(5.0), alpha, cheeger, [1.0, 2.0], seed=2,
                                            sides=("upper",), **COMMON)
    assert {r.mode for r in result.reports} == {UPPER}
    assert all(r.extras["exact_tail"] <= r.rhs for r in result.reports)


def test_tails_domain():
    with pytest.raises(DomainError):
        experiments.verify_tail_bounds(LaplaceMeasure(1.0), 1.0, None, [1.0])
    with pytest.raises(DomainError):
        experiments.verify_tail_bounds(LaplaceMeasure(1.0), 1.0, 1.0, [-1.0])


def test_box_distance():
    assert experiments.box_distance([[0, 1], [0, 1]], [[2, 3], [4, 5]]) == pytest.approx(math.sqrt(10.0))
    assert experiments.box_distance([[0, 2]], [[1, 3]]) == 0.0
    with pytest.raises(DomainError):
        experiments.box_distance([[0, 1]], [[0, 1], [0, 1]])


def test_isoperimetric(pareto_certified):
    alpha, cheeger = pareto_certified
    measure = ParetoMeasure(5.0)
    certificate = constants.l2_certificate(alpha, cheeger)
    result = experiments.verify_isoperimetric(measure, certificate, [[1.0, 1.2], [1.0, 1.2]],
                                              [[3.0, 5.0], [3.0, 5.0]])
    assert result.reports[0].verdict == PASS
    with pytest.raises(DomainError):
        experiments.verify_isoperimetric(measure, certificate, [[0.0, 0.5]], [[2.0, 3.0]])


def test_sharp_poincare_dp():
    result = experiments.verify_sharp_poincare_dp(LaplaceMeasure(1.0), 4.0, 1.5, [2, 4, 8], seed=4, **COMMON)
    bounds = [r for r in result.reports if r.theorem_id == "sharp_poincare_dp"]
    assert len(bounds) == 3
    assert all(r.verdict == PASS for r in bounds)
    assert result.summary["variance_mu"] == pytest.approx(2.0)
    assert result.summary["exponent"] == pytest.approx(1.0 / 3.0)
    with pytest.raises(DomainError):
        experiments.verify_sharp_poincare_dp(LaplaceMeasure(1.0), 4.0, 2.5, [2, 4, 8])


def test_random_matrix():
    result = experiments.verify_random_matrix(5.0, 5, trials=100, seed=6, batches=10)
    report = result.reports[0]
    assert report.verdict == PASS
    assert report.extras["rhs_full_dimension"] > report.rhs
    with pytest.raises(DomainError):
        experiments.verify_random_matrix(5.0, 1, trials=100)
    with pytest.raises(DomainError):
        experiments.verify_random_matrix(5.0, 5, trials=50)


def test_activation_moments():
    closed = experiments.activation_moments(5.0, 2.0)
    assert closed["mean"] == pytest.approx(1.0 / 24.0)
    assert closed["second"] == pytest.approx(1.0 / 12.0)
    assert closed["variance"] == pytest.approx(47.0 / 576.0)
    assert closed["gradient_l2"] == pytest.approx(1.0 / 16.0)
    numeric = experiments.activation_moments_quadrature(5.0, 2.0)
    for key in closed:
        assert numeric[key] == pytest.approx(closed[key], abs=1e-9)


def test_tightness():
    result = experiments.tightness_report(0.8, [2.0 ** k for k in range(1, 9)])
    assert all(r.verdict == PASS for r in result.reports)
    slopes = [r for r in result.reports if r.theorem_id == "tightness_slope"]
    assert [s.rhs for s in slopes] == [pytest.approx(-2.0), pytest.approx(-4.0)]
    with pytest.raises(DomainError):
        experiments.tightness_report(0.6, [2.0, 4.0, 8.0])
    with pytest.raises(DomainError):
        experiments.tightness_report(0.8, [2.0, 4.0])


def test_exponent_comparison():
    result = experiments.exponent_comparison_report(0.8)
    assert all(r.verdict == PASS for r in result.reports)
    assert result.summary["l2_product"] == pytest.approx(0.5)
