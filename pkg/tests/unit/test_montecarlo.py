import math
import os
import sys

import numpy as np
import pytest
from unittest.mock import patch

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from core import montecarlo as mc
from core.errors import DomainError
from core.lipschitz_functions import ActivationFn, ConstantFn, LinearFn, MaxFn, ScaledSumFn
from core.measures import ParetoMeasure
from tests.fixtures.builders import laplace_plan, small_plan


# --- Plans ---

def test_plan_validation():
    with pytest.raises(DomainError):
        small_plan(samples=10, batches=8)
    with pytest.raises(DomainError):
        small_plan(batches=1)
    with pytest.raises(DomainError):
        small_plan(n=0)
    with pytest.raises(DomainError):
        small_plan(n=4, function=MaxFn(3))
    with pytest.raises(DomainError):
        small_plan(confidence=1.0)


def test_batch_sizes_differ_by_at_most_one():
    plan = small_plan(samples=4003, batches=8)
    sizes = plan.batch_sizes()
    assert sum(sizes) == 4003
    assert sizes[:3] == [501, 501, 501]
    assert set(sizes[3:]) == {500}


# --- Estimates ---

def test_variance_is_deterministic_and_logged():
    with patch('builtins.print') as mock_print:
        first = mc.estimate_variance(small_plan())
        second = mc.estimate_variance(small_plan())
    assert first == second
    assert first.ci_low <= first.variance <= first.ci_high
    assert any("[MC]" in str(call) for call in mock_print.call_args_list)


def test_worker_count_does_not_change_results():
    inline = mc.run_plan(small_plan(workers=1))
    pooled = mc.run_plan(small_plan(workers=2))
    assert inline.variance == pooled.variance
    assert inline.mean == pooled.mean


def test_memory_budget_does_not_change_results():
    assert mc.estimate_variance(small_plan(memory_budget=7)) == mc.estimate_variance(small_plan())


def test_constant_function_has_zero_variance():
    estimate = mc.estimate_variance(small_plan(function=ConstantFn(4, value=3.0)))
    assert estimate.variance == 0.0
    assert estimate.ci_low == 0.0
    assert estimate.ci_high == 0.0
    assert estimate.mean == 3.0


def test_laplace_variance_and_mean():
    result = mc.run_plan(laplace_plan(function=LinearFn([1.0])))
    assert abs(result.variance.variance - 2.0) < 0.15
    assert abs(result.mean.value) < 0.05


def test_pareto_mean():
    estimate = mc.estimate_mean(small_plan(n=1, function=LinearFn([1.0]), samples=40_000))
    assert estimate.value == pytest.approx(4.0 / 3.0, abs=0.02)
    assert estimate.ci_low < estimate.value < estimate.ci_high


def test_gradient_moment_of_the_maximum_is_one():
    estimate = mc.estimate_gradient_moment(small_plan(), q=2.0)
    assert estimate.value == pytest.approx(1.0)
    assert estimate.ci_high == pytest.approx(1.0)


def test_coordinatewise_gradient_moment_of_scaled_sum():
    plan = small_plan(n=4, function=ScaledSumFn(4, 1.5))
    estimate = mc.estimate_gradient_moment(plan, q=3.0, coordinatewise=True)
    assert estimate.value == pytest.approx(1.0)
    assert np.allclose(estimate.coordinates, 0.25)


def test_gradient_moment_is_centred_on_the_batch_means():
    plan = small_plan(n=1, function=ActivationFn(1.5), samples=4003, batches=8)
    estimate = mc.estimate_gradient_moment(plan, q=2.0)
    sizes = plan.batch_sizes()
    per_batch = [mc._run_batch(plan, b, sizes[b], 2.0, False, False)["grad_mean"] for b in range(plan.batches)]
    assert estimate.value == pytest.approx(float(np.mean(per_batch)), rel=1e-12)
    assert estimate.ci_high - estimate.value == pytest.approx(estimate.value - estimate.ci_low, rel=1e-9)


def test_variance_ci_covers_the_pareto_variance():
    covered = 0
    with patch('builtins.print'):
        for seed in range(100):
            plan = mc.EstimationPlan(ParetoMeasure(5.0), 1, ScaledSumFn(1, 2.0), 10_000, seed)
            estimate = mc.estimate_variance(plan)
            covered += estimate.ci_low <= 2.0 / 9.0 <= estimate.ci_high
    assert covered >= 85


def test_gradient_moment_order():
    with pytest.raises(DomainError):
        mc.estimate_gradient_moment(small_plan(), q=0.5)


def test_centered_tails():
    tails = mc.estimate_tail(laplace_plan(function=LinearFn([1.0])), [0.5, 1.0])
    assert [t.threshold for t in tails] == [0.5, 1.0]
    assert tails[1].probability == pytest.approx(0.5 * math.exp(-1.0), abs=0.01)
    assert tails[1].ci_low < tails[1].probability < tails[1].ci_high


def test_tail_thresholds_must_be_sorted():
    with pytest.raises(DomainError):
        mc.estimate_tail(small_plan(), [2.0, 1.0])


# --- Helpers ---

def test_batch_halfwidth():
    assert mc.batch_halfwidth([1.0, 1.0, 1.0], 0.95) == 0.0
    assert mc.batch_halfwidth([0.0, 2.0], 0.95) > 0.0


def test_scaling_fit_recovers_a_power_law():
    dims = [1, 2, 4, 8]
    fit = mc.scaling_fit(dims, [3.0 * n ** 0.5 for n in dims])
    assert fit.slope == pytest.approx(0.5)
    assert fit.intercept == pytest.approx(math.log(3.0))
    assert fit.r_squared == pytest.approx(1.0)


def test_scaling_fit_domain():
    with pytest.raises(DomainError):
        mc.scaling_fit([1, 2, 4], [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        mc.scaling_fit([1, 2, 4, 8], [1.0, 0.0, 3.0, 4.0])
    assert mc.scaling_fit([1, 2], [1.0, 2.0], min_points=2).slope == pytest.approx(1.0)
