"""
Explicit constants of the heavy-tailed Poincare and Cheeger bounds.

All evaluators check their hypotheses with strict inequalities, evaluate in
50-digit mpmath arithmetic and return doubles.
"""

import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import mpmath as mp

from . import helpers
from .errors import DomainError

WORKING_DPS = 50

L1_CONTEXT = "the L1 moment bound"
L2_CONTEXT = "the L2 variance bound"
CHEEGER_L1_CONTEXT = "the L1 Cheeger bound"
TRUNCATION_CONTEXT = "the truncation inequality"
TAIL_CONTEXT = "the quantile tail bound"
PARETO_CONTEXT = "the Pareto variance bound"


@dataclass(frozen=True)
class ConstantRequest:
    alpha: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None
    cheeger: Optional[float] = None
    lam: Optional[float] = None

    def as_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class BoundConstants:
    name: str
    value: float
    domain_note: str
    inputs: ConstantRequest = field(default_factory=ConstantRequest)

    def as_dict(self):
        return {"name": self.name, "value": self.value,
                "domain_note": self.domain_note, "inputs": self.inputs.as_dict()}


@dataclass(frozen=True)
class PoincareCertificate:
    """A certified (exponent, constant) pair for one of the product-measure bounds."""
    kind: str
    exponent: float
    value: float
    source: str
    moment: float = 2.0  # power of |f - m| on the left-hand side

    def as_dict(self):
        return asdict(self)


def _finish(name, value, note, request):
    result = float(value)
    if not math.isfinite(result) or result <= 0.0:
        raise DomainError(f"{name} is not finite and positive at {request.as_dict()}")
    return BoundConstants(name=name, value=result, domain_note=note, inputs=request)


def _check_alpha_half(alpha, context):
    helpers.require_open("alpha", alpha, 0.5, 1.0, context)


def _check_cheeger(cheeger, context):
    helpers.require_greater("cheeger", cheeger, 0.0, context)


# --- Lemma constants ---

def c1_constant(alpha, beta, gamma, cheeger):
    _check_alpha_half(alpha, TRUNCATION_CONTEXT)
    helpers.require_half_open("beta", beta, 1.0, helpers.beta_limit(alpha), TRUNCATION_CONTEXT)
    helpers.require_at_least("gamma", gamma, 1.0, TRUNCATION_CONTEXT)
    if gamma > beta:
        raise DomainError(f"{TRUNCATION_CONTEXT} requires gamma <= beta (got gamma={gamma!r}, beta={beta!r})")
    _check_cheeger(cheeger, TRUNCATION_CONTEXT)
    request = ConstantRequest(alpha=alpha, beta=beta, gamma=gamma, cheeger=cheeger)
    with mp.workdps(WORKING_DPS):
        a, b, g, i = mp.mpf(alpha), mp.mpf(beta), mp.mpf(gamma), mp.mpf(cheeger)
        value = 1 + i ** (b / a) * (a / (1 - a)) ** b * (a / (a - b * (1 - a))) \
            * mp.power(2, g - (g - 1) * b * (1 - a) / a)
    return _finish("c1", value, "1/2 < alpha < 1, 1 <= gamma <= beta < alpha/(1-alpha)", request)


def _tail_constants_mp(alpha, gamma, cheeger):
    a, g, i = mp.mpf(alpha), mp.mpf(gamma), mp.mpf(cheeger)
    denom = a + g * a - g
    c2 = i ** (g / a) * (a / (1 - a)) ** g * (g * (1 - a) / denom)
    c3 = (2 * c2) ** (-a / denom)
    return c2, c3


def _check_tail_domain(alpha, beta, gamma, cheeger):
    _check_alpha_half(alpha, TAIL_CONTEXT)
    helpers.require_half_open("gamma", gamma, 1.0, helpers.beta_limit(alpha), TAIL_CONTEXT)
    if beta is None:
        raise DomainError(f"{TAIL_CONTEXT} needs beta >= 1 for c4 (got beta=None)")
    helpers.require_at_least("beta", beta, 1.0, TAIL_CONTEXT)
    _check_cheeger(cheeger, TAIL_CONTEXT)


def c2_c3_c4_constants(alpha, beta, gamma, cheeger):
    """Returns (c2, c3, c4) as BoundConstants."""
    _check_tail_domain(alpha, beta, gamma, cheeger)
    request = ConstantRequest(alpha=alpha, beta=beta, gamma=gamma, cheeger=cheeger)
    note = "1/2 < alpha < 1, 1 <= gamma < alpha/(1-alpha), beta >= 1"
    with mp.workdps(WORKING_DPS):
        c2, c3 = _tail_constants_mp(alpha, gamma, cheeger)
        c4 = c3 ** (mp.mpf(beta) - 1) / 2
    return (_finish("c2", c2, note, request),
            _finish("c3", c3, note, request),
            _finish("c4", c4, note, request))


def c4_constant(alpha, beta, gamma, cheeger):
    return c2_c3_c4_constants(alpha, beta, gamma, cheeger)[2]


# --- Theorem constants ---

def C1_theorem_constant(alpha, beta, cheeger):
    _check_alpha_half(alpha, L1_CONTEXT)
    helpers.require_half_open("beta", beta, 1.0, helpers.beta_limit(alpha), L1_CONTEXT)
    _check_cheeger(cheeger, L1_CONTEXT)
    request = ConstantRequest(alpha=alpha, beta=beta, cheeger=cheeger)
    with mp.workdps(WORKING_DPS):
        a, b, i = mp.mpf(alpha), mp.mpf(beta), mp.mpf(cheeger)
        bracket = 1 + 2 * i ** (b / a) * (a / (1 - a)) ** b * (a / (a - b * (1 - a)))
        value = i ** (a - b * (1 - a)) * bracket
    return _finish("C1", value, "1/2 < alpha < 1, 1 <= beta < alpha/(1-alpha)", request)


def C2_theorem_constant(alpha, cheeger):
    helpers.require_open("alpha", alpha, 2.0 / 3.0, 1.0, L2_CONTEXT, lo_text="2/3")
    _check_cheeger(cheeger, L2_CONTEXT)
    request = ConstantRequest(alpha=alpha, cheeger=cheeger)
    with mp.workdps(WORKING_DPS):
        a, i = mp.mpf(alpha), mp.mpf(cheeger)
        bracket = 2 * i ** (2 / a) * (2 * a ** 2 / ((3 * a - 2) * (1 - a)))
        value = mp.power(2, (16 * a - 10) / a) * i ** ((6 * a - 4) / a) * bracket ** (2 * (1 - a) / a)
    return _finish("C2", value, "2/3 < alpha < 1", request)


def C3_theorem_constant(alpha, cheeger):
    _check_alpha_half(alpha, CHEEGER_L1_CONTEXT)
    _check_cheeger(cheeger, CHEEGER_L1_CONTEXT)
    request = ConstantRequest(alpha=alpha, cheeger=cheeger)
    with mp.workdps(WORKING_DPS):
        a, i = mp.mpf(alpha), mp.mpf(cheeger)
        bracket = 2 * i ** (1 / a) * (a / (2 * a - 1))
        value = 2 * (2 * i) ** ((2 * a - 1) / a) * bracket ** ((1 - a) / a)
    return _finish("C3", value, "1/2 < alpha < 1", request)


def C3_via_c4(alpha, cheeger):
    """C3 rebuilt from c4(alpha, 1/alpha, 1, I); agrees with C3_theorem_constant."""
    _check_alpha_half(alpha, CHEEGER_L1_CONTEXT)
    with mp.workdps(WORKING_DPS):
        a, i = mp.mpf(alpha), mp.mpf(cheeger)
        _, c3 = _tail_constants_mp(alpha, 1.0, cheeger)
        c4 = c3 ** (1 / a - 1) / 2
        value = 2 * i ** ((2 * a - 1) / a) * c4 ** (-(2 * a - 1) / a)
    return float(value)


def C2_via_c4(alpha, cheeger):
    """C2 rebuilt from c4(alpha, 1/alpha, 2, I); agrees with C2_theorem_constant."""
    helpers.require_open("alpha", alpha, 2.0 / 3.0, 1.0, L2_CONTEXT, lo_text="2/3")
    with mp.workdps(WORKING_DPS):
        a, i = mp.mpf(alpha), mp.mpf(cheeger)
        _, c3 = _tail_constants_mp(alpha, 2.0, cheeger)
        c4 = c3 ** (1 / a - 1) / 2
        value = mp.power(2, (10 * a - 6) / a) * i ** ((6 * a - 4) / a) * c4 ** (-(6 * a - 4) / a)
    return float(value)


# --- Pareto ---

def pareto_C_lambda(lam):
    helpers.require_greater("lambda", lam, 3.0, PARETO_CONTEXT)
    request = ConstantRequest(lam=lam)
    with mp.workdps(WORKING_DPS):
        l = mp.mpf(lam)
        value = mp.power(2, (6 * l - 16) / (l - 1)) * (l - 1) ** (-(2 * l - 6) / l) \
            * (4 / (l - 3)) ** (2 / (l - 1))
    return _finish("C(lambda)", value, "lambda > 3", request)


def pareto_C_lambda_proof_variant(lam):
    """C2((lambda-1)/lambda, (lambda-1)^(-lambda/(lambda-1))), reported next to C(lambda)."""
    helpers.require_greater("lambda", lam, 3.0, PARETO_CONTEXT)
    with mp.workdps(WORKING_DPS):
        l = mp.mpf(lam)
        cheeger = float((l - 1) ** (-l / (l - 1)))
    inner = C2_theorem_constant((lam - 1.0) / lam, cheeger)
    return BoundConstants(name="C(lambda) proof variant", value=inner.value,
                          domain_note="lambda > 3; cheeger exponent -lambda/(lambda-1)",
                          inputs=ConstantRequest(lam=lam, alpha=(lam - 1.0) / lam, cheeger=cheeger))


def pareto_cheeger_bound(lam):
    """alpha = (lambda-1)/lambda and I(mu_lambda, alpha) <= (lambda-1)^(-(lambda-1)/lambda)."""
    helpers.require_greater("lambda", lam, 2.0, "the Pareto Cheeger bound")
    with mp.workdps(WORKING_DPS):
        l = mp.mpf(lam)
        alpha = (l - 1) / l
        value = (l - 1) ** (-alpha)
    request = ConstantRequest(lam=lam, alpha=float(alpha))
    return _finish("pareto_cheeger_bound", value, "lambda > 2", request)


def laplace_variance_bound(cheeger):
    """[sharp 2 I^2, classical 4 I^2] variance bounds for a law with classical Cheeger constant I."""
    _check_cheeger(cheeger, "the classical Cheeger variance bound")
    request = ConstantRequest(alpha=1.0, cheeger=cheeger)
    with mp.workdps(WORKING_DPS):
        i = mp.mpf(cheeger)
        sharp, classical = 2 * i ** 2, 4 * i ** 2
    return [_finish("variance_bound_sharp", sharp, "attained by the two-sided exponential law", request),
            _finish("variance_bound_classical", classical, "Cheeger's inequality", request)]


# --- Certificates for the product-measure verifiers ---

def l2_certificate(alpha, cheeger):
    constant = C2_theorem_constant(alpha, cheeger)
    return PoincareCertificate(kind="C2", exponent=(3.0 * alpha - 2.0) / alpha,
                               value=constant.value, source=f"C2(alpha={alpha:g}, I={cheeger:.6g})")


def l1_certificate(alpha, beta, cheeger):
    constant = C1_theorem_constant(alpha, beta, cheeger)
    return PoincareCertificate(kind="C1", exponent=alpha - beta * (1.0 - alpha),
                               value=constant.value, source=f"C1(alpha={alpha:g}, beta={beta:g}, I={cheeger:.6g})", moment=float(beta))


def cheeger_l1_certificate(alpha, cheeger):
    constant = C3_theorem_constant(alpha, cheeger)
    return PoincareCertificate(kind="C3", exponent=(2.0 * alpha - 1.0) / alpha,
                               value=constant.value, source=f"C3(alpha={alpha:g}, I={cheeger:.6g})", moment=1.0)


def exponent_comparison(alpha):
    """Growth exponents in n of the variance of the maximum under each route."""
    _check_alpha_half(alpha, "the exponent comparison")
    return {
        "efron_stein": 1.0,
        "l2_product": 2.0 * (1.0 - alpha) / alpha,
        "l1_dp_route": (4.0 - 3.0 * alpha) / 2.0,
    }


def constants_table(lam=None, alpha=None, cheeger=None, beta=1.0, gamma=1.0):
    """
    Every constant that is defined at the given inputs.

    With lam alone, alpha and the Cheeger value come from the Pareto lemma.
    Constants whose hypotheses fail are left out of the table.
    """
    rows = []
    if lam is not None:
        bound = pareto_cheeger_bound(lam)
        rows.append(bound)
        alpha = bound.inputs.alpha if alpha is None else alpha
        cheeger = bound.value if cheeger is None else cheeger
        for builder in (pareto_C_lambda, pareto_C_lambda_proof_variant):
            try:
                rows.append(builder(lam))
            except DomainError as e:
                print(f"[CONSTANTS] Skipping {builder.__name__}: {e}")
    if alpha is None or cheeger is None:
        return rows

    evaluators = [
        lambda: [C1_theorem_constant(alpha, beta, cheeger)],
        lambda: [C2_theorem_constant(alpha, cheeger)],
        lambda: [C3_theorem_constant(alpha, cheeger)],
        lambda: [c1_constant(alpha, beta, gamma, cheeger)],
        lambda: list(c2_c3_c4_constants(alpha, beta, gamma, cheeger)),
    ]
    for evaluate in evaluators:
        try:
            rows.extend(evaluate())
        except DomainError as e:
            print(f"[CONSTANTS] Skipping: {e}")
    return rows
