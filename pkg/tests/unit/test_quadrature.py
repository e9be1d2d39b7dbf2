import math
import os
import sys

import pytest
from unittest.mock import patch

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from core import quadrature
from core.quadrature import integrate_fn, integrate_with_error


def test_polynomial_tail_integrates_without_truncation():
    # Pareto(5) density
    assert integrate_fn(lambda x: 4.0 * x ** -5.0, 1.0, math.inf) == pytest.approx(1.0, abs=1e-10)


def test_second_moment_of_heavy_tail():
    # E X^2 = 2 for Pareto(5)
    assert integrate_fn(lambda x: 4.0 * x ** -3.0, 1.0, math.inf) == pytest.approx(2.0, rel=1e-10)


def test_whole_line():
    value = integrate_fn(lambda x: 0.5 * math.exp(-abs(x)), -math.inf, math.inf)
    assert value == pytest.approx(1.0, abs=1e-10)


def test_anchor_splits_the_range():
    f = lambda x: 0.5 * math.exp(-abs(x))
    assert integrate_fn(f, -math.inf, math.inf, anchor=3.0) == pytest.approx(1.0, abs=1e-10)


def test_reversed_and_empty_ranges():
    assert integrate_fn(lambda x: x, 0.0, 0.0) == 0.0
    assert integrate_fn(lambda x: 1.0, 2.0, 0.0) == pytest.approx(-2.0)


def test_error_estimate_is_returned():
    value, err = integrate_with_error(lambda x: x * x, 0.0, 3.0)
    assert value == pytest.approx(9.0)
    assert 0.0 <= err < 1e-8


def test_break_points_reach_the_mapped_tail():
    kinked = lambda x: math.exp(-abs(x - 3.0))
    with patch.object(quadrature.integrate, "quad", wraps=quadrature.integrate.quad) as spy:
        value = integrate_fn(kinked, 0.0, math.inf, points=[3.0])
    assert value == pytest.approx(2.0 - math.exp(-3.0), abs=1e-9)
    # x = 3 on [0, inf) sits at u = 1 / (3 - 0 + 1)
    assert spy.call_args_list[-1].kwargs["points"] == [pytest.approx(0.25)]


def test_break_points_outside_a_piece_are_dropped():
    step = lambda x: 1.0 if x < 0.5 else 2.0
    with patch.object(quadrature.integrate, "quad", wraps=quadrature.integrate.quad) as spy:
        value = integrate_fn(step, 0.0, 1.0, points=[0.5, 4.0])
    assert value == pytest.approx(1.5, abs=1e-9)
    assert spy.call_args.kwargs["points"] == [0.5]
