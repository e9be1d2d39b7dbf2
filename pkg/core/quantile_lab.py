"""
Quantile-space checks of the one-dimensional lemmas.

Every check works on the quantile Q_f of a 1-Lipschitz function f, i.e. on the
law of f written as Q_f(U) with U uniform, so each side of each inequality is
a one-dimensional integral over (0, 1) or a finite difference on a p-grid.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from . import constants, helpers
from .errors import DomainError
from .lipschitz_functions import ActivationFn, LinearFn
from .measures import ExtremalMeasure, ExtremalParams, ParetoMeasure, ParetoParams
from .quadrature import integrate_fn
from .reports import bound_report, equality_report

MIN_DERIVATIVE_CELLS = 64
DEFAULT_GRID = 8192
SLOPE_REL_TOL = 1e-8
QUAD_CHECK_TOL = 1e-9
HALF_MASS_XTOL = 1e-10
HALF_MASS_RESIDUAL_TOL = 1e-8
CENTERING_TOL = 1e-8
UNIT_BREAKS = (0.5, 0.9, 0.99, 0.999)
TAIL_CONTEXT = "the quantile tail bound"


@dataclass
class EmpiricalQuantile:
    """Q at grid points; `fn` evaluates Q exactly when the source is analytic."""
    grid: np.ndarray
    values: np.ndarray
    source: dict = field(default_factory=dict)
    fn: Optional[Callable] = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.ndim != 1 or self.grid.shape != self.values.shape:
            raise DomainError("an empirical quantile needs matching 1-D grid and values")
        if np.any(np.diff(self.grid) <= 0.0) or self.grid[0] <= 0.0 or self.grid[-1] >= 1.0:
            raise DomainError("an empirical quantile needs a strictly increasing grid inside (0, 1)")
        if np.any(np.diff(self.values) < 0.0):
            raise DomainError("an empirical quantile must be nondecreasing")

    def __call__(self, p):
        if self.fn is not None:
            return self.fn(p)
        return np.interp(p, self.grid, self.values)

    @property
    def cells(self):
        return len(self.grid) - 1


def quantile_grid(size=DEFAULT_GRID):
    return np.arange(1, size) / size


def empirical_quantile_from_function(quantile_fn, grid_size=DEFAULT_GRID, source=None):
    grid = quantile_grid(grid_size)
    values = np.asarray([quantile_fn(p) for p in grid]) if not _is_vectorized(quantile_fn) else quantile_fn(grid)
    return EmpiricalQuantile(grid=grid, values=values, source=source or {"kind": "analytic"}, fn=quantile_fn)


def _is_vectorized(fn):
    try:
        out = fn(np.array([0.25, 0.75]))
        return np.shape(out) == (2,)
    except (TypeError, ValueError):
        return False


def empirical_quantile_from_samples(samples, grid_size=DEFAULT_GRID, seed=None):
    """Order statistics at ranks ceil(pN); midpoint of neighbours when pN is an integer."""
    ordered = np.sort(np.asarray(samples, dtype=float))
    n = ordered.size
    if n < 2:
        raise DomainError("an empirical quantile from samples needs at least 2 samples")
    grid = quantile_grid(grid_size)
    scaled = grid * n
    ranks = np.ceil(scaled).astype(np.int64)
    exact = np.isclose(scaled, np.round(scaled), rtol=0.0, atol=1e-9)
    ranks = np.where(exact, np.round(scaled).astype(np.int64), ranks)
    lower = ordered[np.clip(ranks - 1, 0, n - 1)]
    upper = ordered[np.clip(ranks, 0, n - 1)]
    values = np.where(exact, 0.5 * (lower + upper), lower)
    return EmpiricalQuantile(grid=grid, values=values,
                             source={"kind": "samples", "n": int(n), "seed": seed})


def pushforward_quantile(measure, fn_1d, center=True):
    """
    p -> f(Q(p)) - f(Q(1/2)) for a nondecreasing 1-D function f, which is the
    median-centered quantile of f under the measure.
    """
    shift = fn_1d(measure.quantile(0.5)) if center else 0.0

    def quantile(p):
        p_arr = np.asarray(p, dtype=float)
        x = np.atleast_1d(measure.quantile(p_arr))
        values = fn_1d.values(x) - shift
        return float(values[0]) if np.ndim(p) == 0 else values.reshape(p_arr.shape)

    return quantile


def _signed_power(x, gamma):
    return np.sign(x) * np.power(np.abs(x), gamma)


def _unit_integral(fn, lo=0.0, hi=1.0):
    breaks = [b for b in UNIT_BREAKS if lo < b < hi]
    return integrate_fn(fn, lo, hi, points=breaks or None)


def _check_lemma_domain(alpha, gamma, cheeger, context):
    helpers.require_open("alpha", alpha, 0.5, 1.0, context)
    helpers.require_half_open("gamma", gamma, 1.0, helpers.beta_limit(alpha), context)
    helpers.require_greater("cheeger", cheeger, 0.0, context)


def _require_centered(q, context):
    center = float(q(0.5))
    if abs(center) > CENTERING_TOL:
        raise DomainError(f"{context} requires a median-centered quantile (Q(1/2)={center:.3g})")


# --- Derivative bound ---

def derivative_bound(alpha, cheeger, p):
    """(I / min{p, 1-p})^(1/alpha)."""
    p = np.asarray(p, dtype=float)
    return np.power(cheeger / np.minimum(p, 1.0 - p), 1.0 / alpha)


def quantile_derivative_ratios(q, alpha, cheeger):
    """Per-cell (midpoint, secant / bound(mid), allowed slack) arrays."""
    grid = q.grid
    values = q(grid) if q.fn is not None else q.values
    slopes = np.diff(values) / np.diff(grid)
    mid = 0.5 * (grid[1:] + grid[:-1])
    at_mid = derivative_bound(alpha, cheeger, mid)
    worst_in_cell = np.maximum(derivative_bound(alpha, cheeger, grid[:-1]), derivative_bound(alpha, cheeger, grid[1:]))
    return mid, slopes / at_mid, worst_in_cell / at_mid - 1.0


def quantile_derivative_check(q, alpha, cheeger, theorem_id="dq_lemma", label="Q' <= (I/min{p,1-p})^(1/alpha)"):
    """Secant slope of Q on each cell against the largest bound value on that cell."""
    if q.cells < MIN_DERIVATIVE_CELLS:
        raise DomainError(f"the derivative check requires at least {MIN_DERIVATIVE_CELLS} cells (got {q.cells})")
    helpers.require_open("alpha", alpha, 0.0, 1.0, "the derivative check")
    helpers.require_greater("cheeger", cheeger, 0.0, "the derivative check")
    mid, ratios, slack = quantile_derivative_ratios(q, alpha, cheeger)
    normalized = ratios / (1.0 + slack)
    k = int(np.argmax(normalized))
    return bound_report(
        theorem_id, label, lhs=float(normalized[k]), rhs=1.0, tolerance=SLOPE_REL_TOL,
        config={"alpha": alpha, "cheeger": cheeger, "cells": q.cells, "source": q.source},
        extras={"worst_p": float(mid[k]), "worst_ratio_at_mid": float(ratios[k]),
                "max_ratio_at_mid": float(ratios.max()), "grid_slack": float(slack[k])},
    )


# --- Integrated (FTC) tail bound ---

def ftc_bound(alpha, cheeger, t):
    return cheeger ** (1.0 / alpha) * (alpha / (1.0 - alpha)) * (1.0 - t) ** (1.0 - 1.0 / alpha)


def ftc_tail_bound(q, alpha, cheeger, t, theorem_id="ftc_lemma"):
    """Q(t) <= I^(1/alpha) (alpha/(1-alpha)) (1-t)^(1-1/alpha) for t in (1/2, 1)."""
    helpers.require_open("t", t, 0.5, 1.0, "the integrated tail bound")
    helpers.require_open("alpha", alpha, 0.0, 1.0, "the integrated tail bound")
    _require_centered(q, "the integrated tail bound")
    lhs = float(q(t))
    rhs = ftc_bound(alpha, cheeger, t)
    return bound_report(theorem_id, f"Q({t:g}) <= FTC bound", lhs=lhs, rhs=rhs, tolerance=QUAD_CHECK_TOL,
                        config={"alpha": alpha, "cheeger": cheeger, "t": t, "source": q.source},
                        extras={"ratio": lhs / rhs})


# --- Truncation ---

def truncate_half(values):
    """Clamp to [-1/2, 1/2]."""
    return np.clip(np.asarray(values, dtype=float), -0.5, 0.5)


def truncation_inequality_check(q, alpha, beta, gamma, cheeger, theorem_id="truncation_lemma"):
    """E|f|^beta <= c1 * E|(f^gamma)_[-1/2,1/2]|^(1 - beta(1-alpha)/alpha)."""
    c1 = constants.c1_constant(alpha, beta, gamma, cheeger).value
    _require_centered(q, "the truncation inequality")
    moment = _unit_integral(lambda p: abs(float(q(p))) ** beta)
    truncated = _unit_integral(lambda p: abs(float(truncate_half(_signed_power(float(q(p)), gamma)))))
    exponent = 1.0 - beta * (1.0 - alpha) / alpha
    rhs = c1 * truncated ** exponent
    return bound_report(theorem_id, f"E|f|^{beta:g} <= c1 E|trunc(f^{gamma:g})|^{exponent:.4g}",
                        lhs=moment, rhs=rhs, tolerance=QUAD_CHECK_TOL,
                        config={"alpha": alpha, "beta": beta, "gamma": gamma, "cheeger": cheeger, "source": q.source},
                        extras={"c1": c1, "truncated_mean": truncated})


# --- G_gamma majorant ---

def g_gamma_majorant(alpha, gamma, cheeger, x):
    """I^(gamma/alpha) (alpha/(1-alpha))^gamma (1-x)^(-gamma(1-alpha)/alpha) on [1/2, 1)."""
    _check_lemma_domain(alpha, gamma, cheeger, "the boundary function")
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0.5) | (x_arr >= 1.0)):
        raise DomainError(f"the boundary function requires 1/2 <= x < 1 (got x={x!r})")
    values = cheeger ** (gamma / alpha) * (alpha / (1.0 - alpha)) ** gamma \
        * np.power(1.0 - x_arr, -gamma * (1.0 - alpha) / alpha)
    return float(values) if np.ndim(x) == 0 else values


def g_gamma_derivative(alpha, gamma, cheeger, x):
    x_arr = np.asarray(x, dtype=float)
    return gamma * cheeger ** (gamma / alpha) * (alpha / (1.0 - alpha)) ** (gamma - 1.0) \
        * np.power(1.0 - x_arr, -(gamma - gamma * alpha + alpha) / alpha)


def g_gamma_derivative_check(q, alpha, gamma, cheeger, theorem_id="boundary_function_lemma"):
    """Secant slope of Q^gamma on [1/2, 1) against G_gamma' at the right end of each cell."""
    _check_lemma_domain(alpha, gamma, cheeger, "the boundary function")
    _require_centered(q, "the boundary function")
    grid = q.grid[q.grid >= 0.5]
    if len(grid) - 1 < MIN_DERIVATIVE_CELLS:
        raise DomainError(f"the boundary function check requires at least {MIN_DERIVATIVE_CELLS} cells on [1/2, 1)")
    powered = _signed_power(np.asarray(q(grid), dtype=float), gamma)
    slopes = np.diff(powered) / np.diff(grid)
    bound = g_gamma_derivative(alpha, gamma, cheeger, grid[1:])
    ratios = slopes / bound
    k = int(np.argmax(ratios))
    return bound_report(theorem_id, f"(Q^{gamma:g})' <= G_gamma'", lhs=float(ratios[k]), rhs=1.0,
                        tolerance=SLOPE_REL_TOL,
                        config={"alpha": alpha, "gamma": gamma, "cheeger": cheeger, "source": q.source},
                        extras={"worst_p": float(grid[k + 1])})


def q_gamma_tail_check(q, alpha, gamma, cheeger, p, theorem_id="quantile_tail_lemma"):
    """int_p^1 (Q^gamma - Q(p)^gamma) <= c2 (1-p)^((alpha + gamma alpha - gamma)/alpha)."""
    _check_lemma_domain(alpha, gamma, cheeger, TAIL_CONTEXT)
    helpers.require_half_open("p", p, 0.5, 1.0, TAIL_CONTEXT)
    _require_centered(q, TAIL_CONTEXT)
    c2 = constants.c2_c3_c4_constants(alpha, 1.0, gamma, cheeger)[0].value
    level = float(_signed_power(float(q(p)), gamma))
    lhs = _unit_integral(lambda x: float(_signed_power(float(q(x)), gamma)) - level, p, 1.0)
    rhs = c2 * (1.0 - p) ** ((alpha + gamma * alpha - gamma) / alpha)
    return bound_report(theorem_id, f"int_p^1 Q^{gamma:g} - Q(p)^{gamma:g} <= c2 (1-p)^e",
                        lhs=lhs, rhs=rhs, tolerance=QUAD_CHECK_TOL,
                        config={"alpha": alpha, "gamma": gamma, "cheeger": cheeger, "p": p, "source": q.source},
                        extras={"c2": c2})


# --- Half-mass point ---

@dataclass
class HalfMassPoint:
    p_value: float
    mass: float
    residual: float = 0.0


def half_mass_point(g):
    """
    Smallest p in [1/2, 1) with int_p^1 (g(x) - g(p)) dx = M/2, where
    M = int_{1/2}^1 g. A g with g(1/2) != 0 is shifted by g(1/2) first.
    """
    baseline = float(g(0.5))
    shifted = lambda x: float(g(x)) - baseline
    mass = _unit_integral(shifted, 0.5, 1.0)
    if not math.isfinite(mass) or mass <= 0.0:
        raise DomainError(f"the half-mass point requires 0 < M < inf (got M={mass!r})")

    def excess(p):
        level = shifted(p)
        return _unit_integral(lambda x: shifted(x) - level, p, 1.0) - 0.5 * mass

    hi, k = 1.0 - 2.0 ** -10, 10
    while excess(hi) > 0.0:
        k += 4
        if k > 48:
            raise DomainError("the half-mass point could not be bracketed below 1")
        hi = 1.0 - 2.0 ** -k
    p_star = optimize.bisect(excess, 0.5, hi, xtol=HALF_MASS_XTOL)
    return HalfMassPoint(p_value=float(p_star), mass=mass, residual=float(excess(p_star)))


def half_mass_consistency(g, theorem_id="half_mass_point", label="int_p^1 (g - g(p)) = M/2"):
    point = half_mass_point(g)
    return equality_report(theorem_id, label, lhs=point.residual, target=0.0,
                           tolerance=HALF_MASS_RESIDUAL_TOL,
                           extras={"p": point.p_value, "mass": point.mass})


def half_mass_bound_check(q, alpha, gamma, cheeger, theorem_id="half_mass_bound_lemma"):
    """1 - p(Q^gamma) >= c3 M^(alpha/(alpha + gamma alpha - gamma)), reported as c3 M^e <= 1 - p."""
    _check_lemma_domain(alpha, gamma, cheeger, "the half-mass bound")
    _require_centered(q, "the half-mass bound")
    c3 = constants.c2_c3_c4_constants(alpha, 1.0, gamma, cheeger)[1].value
    point = half_mass_point(lambda x: float(_signed_power(float(q(x)), gamma)))
    exponent = alpha / (alpha + gamma * alpha - gamma)
    lhs = c3 * point.mass ** exponent
    return bound_report(theorem_id, "c3 M^e <= 1 - p(Q^gamma)", lhs=lhs, rhs=1.0 - point.p_value,
                        tolerance=QUAD_CHECK_TOL,
                        config={"alpha": alpha, "gamma": gamma, "cheeger": cheeger, "source": q.source},
                        extras={"c3": c3, "mass": point.mass, "p": point.p_value})


# --- Main L2 inequality ---

def main_l2_inequality_check(tail, alpha, beta, gamma, cheeger, theorem_id="main_l2_lemma", label=None):
    """
    int_0^inf tail^beta >= c4 M^((alpha beta + gamma alpha - gamma)/(alpha + gamma alpha - gamma)),
    M = int_0^inf tail, reported as c4 M^e <= int tail^beta.
    """
    c4 = constants.c4_constant(alpha, beta, gamma, cheeger).value
    mass = integrate_fn(lambda t: float(tail(t)), 0.0, math.inf)
    if not math.isfinite(mass):
        raise DomainError("the main L2 inequality requires a finite tail integral M")
    powered = integrate_fn(lambda t: float(tail(t)) ** beta, 0.0, math.inf)
    exponent = (alpha * beta + gamma * alpha - gamma) / (alpha + gamma * alpha - gamma)
    lhs = c4 * mass ** exponent
    return bound_report(theorem_id, label or f"c4 M^e <= int tail^{beta:g}", lhs=lhs, rhs=powered,
                        tolerance=QUAD_CHECK_TOL,
                        config={"alpha": alpha, "beta": beta, "gamma": gamma, "cheeger": cheeger},
                        extras={"c4": c4, "mass": mass, "exponent": exponent})


# --- Battery ---

def run_lemma_suite(lam=5.0, m=2.0, m_main=4.0, grid_size=DEFAULT_GRID):
    """
    All lemma checks on f(x) = x and the activation f_m under mu_lambda, with
    alpha = (lambda-1)/lambda and I the Pareto Cheeger value.
    """
    start_time = time.time()
    bound = constants.pareto_cheeger_bound(lam)
    alpha, cheeger = bound.inputs.alpha, bound.value
    measure = ParetoMeasure(ParetoParams(lam))
    median = measure.median
    identity = LinearFn([1.0])
    activation = ActivationFn(m)

    q_id = empirical_quantile_from_function(pushforward_quantile(measure, identity), grid_size,
                                            source={"kind": "analytic", "measure": measure.describe(), "function": "identity"})
    q_act = empirical_quantile_from_function(pushforward_quantile(measure, activation), grid_size,
                                             source={"kind": "analytic", "measure": measure.describe(),
                                                     "function": activation.describe()})
    extremal = ExtremalMeasure(ExtremalParams(alpha, cheeger))
    q_ext = empirical_quantile_from_function(extremal.quantile, grid_size,
                                             source={"kind": "analytic", "measure": extremal.describe()})

    reports = [
        quantile_derivative_check(q_id, alpha, cheeger, label="identity: Q' <= bound"),
        quantile_derivative_check(q_act, alpha, cheeger, label="activation: Q' <= bound"),
        ftc_tail_bound(q_id, alpha, cheeger, 0.9),
        ftc_tail_bound(q_ext, alpha, cheeger, 0.99),
        truncation_inequality_check(q_id, alpha, 1.0, 1.0, cheeger),
        truncation_inequality_check(q_act, alpha, 2.0, 2.0, cheeger),
        g_gamma_derivative_check(q_id, alpha, 2.0, cheeger),
        q_gamma_tail_check(q_id, alpha, 2.0, cheeger, 0.75),
        half_mass_bound_check(q_id, alpha, 2.0, cheeger),
        half_mass_consistency(lambda x: g_gamma_majorant(alpha, 2.0, cheeger, x),
                              label="half-mass point of G_gamma"),
    ]

    def identity_tail(gamma):
        return lambda t: measure.tail(median + t ** (1.0 / gamma))

    def activation_tail(level, gamma):
        return lambda t: measure.tail(level + t ** (1.0 / gamma))

    reports += [
        main_l2_inequality_check(identity_tail(2.0), alpha, 1.0, 2.0, cheeger, label="beta=1: M >= M/2"),
        main_l2_inequality_check(identity_tail(2.0), alpha, 1.0 / alpha, 2.0, cheeger,
                                 label="identity, beta=1/alpha, gamma=2"),
        main_l2_inequality_check(activation_tail(m_main, 1.0), alpha, 1.0 / alpha, 1.0, cheeger,
                                 label=f"activation m={m_main:g}, beta=1/alpha, gamma=1"),
    ]
    passed = sum(1 for r in reports if r.passed)
    print(f"[LEMMAS] {passed}/{len(reports)} lemma checks passed for lambda={lam:g} "
          f"(took {helpers.elapsed_ms(start_time):.2f}ms)")
    return reports
