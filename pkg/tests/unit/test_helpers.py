import math
import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from core import helpers
from core.errors import DomainError


def test_require_open_is_strict_on_both_ends():
    assert helpers.require_open("alpha", 0.8, 0.5, 1.0, "ctx") == 0.8
    for bad in (0.5, 1.0, 1.2):
        with pytest.raises(DomainError):
            helpers.require_open("alpha", bad, 0.5, 1.0, "ctx")


def test_domain_message_names_the_hypothesis():
    with pytest.raises(DomainError) as exc:
        helpers.require_open("alpha", 0.6, 2.0 / 3.0, 1.0, "the L2 variance bound", lo_text="2/3")
    assert str(exc.value) == "the L2 variance bound requires 2/3 < alpha < 1 (got alpha=0.6)"


def test_require_half_open_and_at_least():
    assert helpers.require_half_open("gamma", 1.0, 1.0, 4.0, "ctx") == 1.0
    with pytest.raises(DomainError):
        helpers.require_half_open("gamma", 4.0, 1.0, 4.0, "ctx")
    with pytest.raises(DomainError):
        helpers.require_at_least("n", 0, 1, "ctx")


def test_require_finite_rejects_nan_and_inf():
    helpers.require_finite("entries", [1.0, 2.0], "ctx")
    with pytest.raises(DomainError):
        helpers.require_finite("entries", [1.0, math.nan], "ctx")
    with pytest.raises(DomainError):
        helpers.require_finite("entries", [math.inf], "ctx")


def test_dual_exponent():
    assert helpers.dual_exponent(2.0) == 2.0
    assert helpers.dual_exponent(1.5) == pytest.approx(3.0)
    assert helpers.dual_exponent(math.inf) == 1.0


def test_beta_limit():
    assert helpers.beta_limit(0.8) == pytest.approx(4.0)
