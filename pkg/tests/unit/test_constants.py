import os
import sys

import pytest
from unittest.mock import patch

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from core import constants
from core.errors import DomainError

PARETO_CHEEGER = 4.0 ** -0.8


# --- Goldens ---

def test_pareto_constant_at_lambda_5():
    assert constants.pareto_C_lambda(5.0).value == pytest.approx(2.0 ** 2.4, rel=1e-12)


def test_l2_constant_at_unit_cheeger():
    assert constants.C2_theorem_constant(0.8, 1.0).value == pytest.approx(64.0, rel=1e-12)


def test_pareto_cheeger_bound():
    bound = constants.pareto_cheeger_bound(5.0)
    assert bound.value == pytest.approx(4.0 ** -0.8, rel=1e-12)
    assert bound.inputs.alpha == pytest.approx(0.8)


@pytest.mark.parametrize("cheeger", [1.0, PARETO_CHEEGER, 3.0])
def test_theorem_constants_agree_with_lemma_route(cheeger):
    c3 = constants.C3_theorem_constant(0.8, cheeger).value
    c2 = constants.C2_theorem_constant(0.8, cheeger).value
    assert constants.C3_via_c4(0.8, cheeger) == pytest.approx(c3, rel=1e-12)
    assert constants.C2_via_c4(0.8, cheeger) == pytest.approx(c2, rel=1e-12)


def test_pareto_constant_is_c2_at_the_pareto_certificate():
    c2 = constants.C2_theorem_constant(0.8, PARETO_CHEEGER).value
    assert c2 == pytest.approx(constants.pareto_C_lambda(5.0).value, rel=1e-12)


def test_c1_closed_form():
    # I = 1: 1 + 2 * 4 * (0.8 / 0.6)
    expected = 1.0 + 2.0 * 4.0 * (0.8 / 0.6)
    assert constants.C1_theorem_constant(0.8, 1.0, 1.0).value == pytest.approx(expected, rel=1e-12)


def test_c4_at_beta_one_is_one_half():
    assert constants.c4_constant(0.8, 1.0, 2.0, 1.0).value == pytest.approx(0.5, rel=1e-12)


def test_proof_variant_is_reported_separately():
    variant = constants.pareto_C_lambda_proof_variant(5.0)
    assert variant.inputs.alpha == pytest.approx(0.8)
    assert variant.inputs.cheeger == pytest.approx(4.0 ** -1.25)
    assert variant.value != pytest.approx(constants.pareto_C_lambda(5.0).value)


def test_laplace_variance_bounds():
    sharp, classical = constants.laplace_variance_bound(1.0)
    assert sharp.value == pytest.approx(2.0)
    assert classical.value == pytest.approx(4.0)


# --- Domains ---

def test_l2_constant_requires_alpha_above_two_thirds():
    with pytest.raises(DomainError) as exc:
        constants.C2_theorem_constant(0.6, 1.0)
    assert "2/3 < alpha < 1" in str(exc.value)


def test_pareto_constant_requires_lambda_above_three():
    with pytest.raises(DomainError):
        constants.pareto_C_lambda(3.0)


def test_c1_lemma_requires_gamma_at_most_beta():
    with pytest.raises(DomainError):
        constants.c1_constant(0.8, 1.0, 2.0, 1.0)


def test_beta_must_stay_below_alpha_ratio():
    with pytest.raises(DomainError):
        constants.C1_theorem_constant(0.8, 4.0, 1.0)


@pytest.mark.parametrize("beta", [None, 0.5])
def test_tail_constants_require_beta_at_least_one(beta):
    with pytest.raises(DomainError):
        constants.c2_c3_c4_constants(0.8, beta, 1.0, 1.0)
    with pytest.raises(DomainError):
        constants.c4_constant(0.8, beta, 1.0, 1.0)


# --- Certificates and tables ---

def test_certificates():
    l2 = constants.l2_certificate(0.8, PARETO_CHEEGER)
    assert l2.kind == "C2"
    assert l2.exponent == pytest.approx(0.5)
    l1 = constants.l1_certificate(0.8, 2.0, PARETO_CHEEGER)
    assert l1.kind == "C1"
    assert l1.moment == 2.0
    assert l1.exponent == pytest.approx(0.4)
    c3 = constants.cheeger_l1_certificate(0.8, PARETO_CHEEGER)
    assert c3.moment == 1.0
    assert c3.exponent == pytest.approx(0.75)


def test_exponent_comparison():
    exponents = constants.exponent_comparison(0.8)
    assert exponents["efron_stein"] == 1.0
    assert exponents["l2_product"] == pytest.approx(0.5)
    assert exponents["l1_dp_route"] == pytest.approx(0.8)


def test_constants_table_for_pareto():
    rows = constants.constants_table(lam=5.0)
    names = [row.name for row in rows]
    for name in ("pareto_cheeger_bound", "C(lambda)", "C(lambda) proof variant", "C1", "C2", "C3", "c1",
                 "c2", "c3", "c4"):
        assert name in names
    by_name = {row.name: row.value for row in rows}
    assert by_name["C(lambda)"] == pytest.approx(5.27803, abs=1e-5)


def test_constants_table_skips_undefined_rows():
    with patch('builtins.print') as mock_print:
        rows = constants.constants_table(lam=3.5)
    names = [row.name for row in rows]
    assert "C(lambda)" in names
    assert "C2" in names
    with patch('builtins.print') as mock_print:
        rows = constants.constants_table(lam=2.5)
    names = [row.name for row in rows]
    assert "C(lambda)" not in names
    assert "C2" not in names
    assert any("[CONSTANTS]" in str(call) for call in mock_print.call_args_list)
