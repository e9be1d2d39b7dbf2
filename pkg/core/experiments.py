"""
Verifiers for the variance, tail, isoperimetric and random-matrix bounds.

Each verifier assembles laws, test functions, certified constants and Monte
Carlo estimates into BoundReports, plus plot-ready rows where a quantity is
followed across dimensions.
"""

import math
import multiprocessing as mp
import time
from dataclasses import dataclass, field

import numpy as np

from . import constants, helpers, linalg
from .constants import PoincareCertificate
from .errors import DomainError
from .lipschitz_functions import LinearFn, LipschitzFn, ScaledSumFn, build_function
from .measures import ExtremalParams, ParetoMeasure, extremal_tail, numeric_moments
from .montecarlo import (DEFAULT_BATCHES, DEFAULT_CONFIDENCE, EstimationPlan,
                         batch_halfwidth, run_plan, scaling_fit)
from .quadrature import integrate_fn
from .reports import bound_report, equality_report
from .streams import derive_seed

DEFAULT_SAMPLES = 100_000
DEFAULT_TRIALS = 500
DEFAULT_TRIAL_BATCHES = 20
EQUALITY_CONFIDENCE = 0.999

SLOPE_TOLERANCE = 0.1
SHARP_SLOPE_TOLERANCE = 0.05
TIGHTNESS_SLOPE_REL_TOL = 0.01
CLOSED_FORM_TOL = 1e-9
ATTAINED_REL_TOL = 1e-9

TRIAL_BLOCK = 50
MIN_TRIALS = 100
MAX_MATRIX_ORDER = 256

PLOT_COLUMNS = ["n", "variance", "ci_low", "ci_high", "bound"]


@dataclass
class ExperimentResult:
    name: str
    reports: list
    plot_rows: list = field(default_factory=list)
    plot_columns: list = field(default_factory=lambda: list(PLOT_COLUMNS))
    summary: dict = field(default_factory=dict)


def _plan(measure, n, function, samples, seed, batches, workers, confidence):
    return EstimationPlan(measure=measure, dimension=n, function=function, samples=samples, seed=seed,
                          batches=batches, workers=workers, confidence=confidence)


def _certificate(certificate, alpha, kinds, context):
    """(value, exponent, kind) from a PoincareCertificate or a bare constant plus alpha."""
    if certificate is None:
        raise DomainError(f"{context} requires a certified constant")
    if isinstance(certificate, PoincareCertificate):
        if certificate.kind not in kinds:
            raise DomainError(f"{context} accepts {'/'.join(kinds)} certificates (got {certificate.kind})")
        exponent = certificate.exponent if alpha is None else alpha
        value, kind = certificate.value, certificate.kind
    else:
        if alpha is None:
            raise DomainError(f"{context} needs alpha alongside a bare constant")
        value, exponent, kind = float(certificate), alpha, kinds[0]
    helpers.require_open("alpha", exponent, 0.0, 1.0, context)
    helpers.require_greater("constant", value, 0.0, context)
    return float(value), float(exponent), kind


def _function(fn, n, p=None, **params):
    if isinstance(fn, LipschitzFn):
        return fn
    if fn == "scaled_sum":
        return build_function(fn, n=n, p=2.0 if p is None else p)
    if fn in ("identity", "activation", "constant", "linear", "distance_to_set"):
        return build_function(fn, **params)
    return build_function(fn, n=n, **params)


# --- Pareto variance growth ---

def verify_pareto_theorem(lam, dims, samples=DEFAULT_SAMPLES, seed=1, fn="max", batches=DEFAULT_BATCHES,
                          workers=1, confidence=DEFAULT_CONFIDENCE, slope_tolerance=SLOPE_TOLERANCE):
    """Var(f) under mu_lambda^n against C(lambda) n^(2/(lambda-1)), plus the log-log slope."""
    start_time = time.time()
    helpers.require_greater("lambda", lam, 3.0, constants.PARETO_CONTEXT)
    dims = [int(n) for n in dims]
    if not dims or min(dims) < 1:
        raise DomainError("the Pareto variance bound needs dimensions >= 1")
    measure = ParetoMeasure(lam)
    c_lambda = constants.pareto_C_lambda(lam).value
    exponent = 2.0 / (lam - 1.0)

    _, variance_1d = measure.analytic_moments()
    reports = [bound_report("pareto_theorem_1d", "Var_mu(x) <= C(lambda)", variance_1d, c_lambda,
                            config={"lambda": lam})]
    rows, variances = [], []
    for n in dims:
        plan_seed = derive_seed(seed, f"pareto:{fn}:{n}")
        plan = _plan(measure, n, _function(fn, n), samples, plan_seed, batches, workers, confidence)
        est = run_plan(plan).variance
        rhs = c_lambda * n ** exponent
        reports.append(bound_report(
            "pareto_theorem", f"Var({fn}) <= C(lambda) n^(2/(lambda-1)), n={n}",
            est.variance, rhs, ci_low=est.ci_low, ci_high=est.ci_high,
            config={"lambda": lam, **plan.describe()}, seed=plan_seed, samples=est.n_samples,
            extras={"batch_median_variance": est.batch_median_variance},
        ))
        rows.append([n, est.variance, est.ci_low, est.ci_high, rhs])
        variances.append(est.variance)

    summary = {"C_lambda": c_lambda, "exponent": exponent,
               "C_lambda_proof_variant": constants.pareto_C_lambda_proof_variant(lam).value}
    if len(dims) >= 2:
        fit = scaling_fit(dims, variances, min_points=2)
        reports.append(equality_report(
            "pareto_scaling", "log-log slope of Var = 2/(lambda-1)", fit.slope, exponent,
            tolerance=slope_tolerance, config={"lambda": lam, "dims": dims, "function": fn},
            seed=seed, extras={"intercept": fit.intercept, "r_squared": fit.r_squared},
        ))
        summary["slope"] = fit.slope
    print(f"[VERIFY] Pareto lambda={lam:g} over n={dims} (took {helpers.elapsed_ms(start_time):.2f}ms)")
    return ExperimentResult(name="verify-pareto", reports=reports, plot_rows=rows, summary=summary)


# --- Product measures ---

def verify_product_theorem(measure, certificate, fn, n, samples=DEFAULT_SAMPLES, seed=1, alpha=None,
                           batches=DEFAULT_BATCHES, workers=1, confidence=DEFAULT_CONFIDENCE):
    """Var(f) <= C2 n^(1-alpha) (E|grad f|^2)^alpha; alpha is the Poincare exponent of the certificate."""
    context = "the product-measure variance bound"
    value, alpha, _ = _certificate(certificate, alpha, ("C2",), context)
    function = _function(fn, n)
    if not function.supports_metric(2.0):
        raise DomainError(f"{context} needs a function 1-Lipschitz for the Euclidean metric (got {function.name})")
    plan = _plan(measure, n, function, samples, seed, batches, workers, confidence)
    result = run_plan(plan, q=2.0)
    est, grad = result.variance, result.gradient
    # the gradient moment is random too; its lower CI end keeps the check conservative
    rhs = value * n ** (1.0 - alpha) * grad.ci_low ** alpha
    report = bound_report(
        "product_theorem", f"Var <= C2 n^(1-alpha) (E|grad f|^2)^alpha, n={n}",
        est.variance, rhs, ci_low=est.ci_low, ci_high=est.ci_high,
        config={"alpha": alpha, "constant": value, **plan.describe()}, seed=seed, samples=est.n_samples,
        extras={"gradient_moment": grad.value, "gradient_moment_ci_low": grad.ci_low,
                "batch_median_variance": est.batch_median_variance},
    )
    return ExperimentResult(name="verify-product", reports=[report],
                            plot_rows=[[n, est.variance, est.ci_low, est.ci_high, rhs]])


def verify_dp_theorem(measure, certificate, p, fn, n, samples=DEFAULT_SAMPLES, seed=1, alpha=None,
                      batches=DEFAULT_BATCHES, workers=1, confidence=DEFAULT_CONFIDENCE):
    """
    Variance bound for d_p 1-Lipschitz f:

        C1 branch (1 < p <= inf): C n^(1-e) S^e with e = alpha (p-1)/p
        C2 branch (1 < p <= 2):   C n^(1-e) S^e with e = 2 alpha (p-1)/p

    where S = sum_i E|d_i f|^(p/(p-1)).
    """
    context = "the d_p variance bound"
    value, alpha, kind = _certificate(certificate, alpha, ("C1", "C2"), context)
    if kind == "C1" and isinstance(certificate, PoincareCertificate) and certificate.moment != 2.0:
        raise DomainError(f"{context} needs a C1 certificate for the second moment (got moment {certificate.moment:g})")
    if kind == "C1" and not p > 1.0:
        raise DomainError(f"{context} requires 1 < p <= inf for the C1 branch (got p={p!r})")
    if kind == "C2" and not 1.0 < p <= 2.0:
        raise DomainError(f"{context} requires 1 < p <= 2 for the C2 branch (got p={p!r})")
    function = _function(fn, n, p=p)
    if not function.supports_metric(p):
        raise DomainError(f"{context}: {function.name} is not 1-Lipschitz for d_p with p={p:g}")

    dual = helpers.dual_exponent(p)
    exponent = (1.0 if kind == "C1" else 2.0) * alpha / dual
    plan = _plan(measure, n, function, samples, seed, batches, workers, confidence)
    result = run_plan(plan, q=dual, coordinatewise=True)
    est, grad = result.variance, result.gradient
    rhs = value * n ** (1.0 - exponent) * grad.ci_low ** exponent
    report = bound_report(
        "dp_theorem", f"Var <= {kind} n^(1-e) (sum E|d_i f|^(p/(p-1)))^e, p={p:g}, n={n}",
        est.variance, rhs, ci_low=est.ci_low, ci_high=est.ci_high,
        config={"kind": kind, "alpha": alpha, "p": _finite(p), "constant": value, **plan.describe()},
        seed=seed, samples=est.n_samples,
        extras={"coordinate_moment_sum": grad.value, "coordinate_moment_sum_ci_low": grad.ci_low,
                "exponent": exponent},
    )
    return ExperimentResult(name="verify-dp", reports=[report],
                            plot_rows=[[n, est.variance, est.ci_low, est.ci_high, rhs]])


def _finite(x):
    return x if math.isfinite(x) else "inf"


# --- Tails ---

def verify_tail_bounds(measure, alpha, cheeger, thresholds, samples=DEFAULT_SAMPLES, seed=1,
                       sides=("upper", "lower"), batches=DEFAULT_BATCHES, workers=1,
                       confidence=EQUALITY_CONFIDENCE):
    """
    Centered tails of the identity against the extremal law X(alpha, I), or
    against 1/2 exp(-t / I) when alpha = 1 (I = 1/rate for the
    two-sided exponential law). Thresholds where the law attains the
    bound are checked for equality, the rest one-sided.
    """
    context = "the tail bound"
    if cheeger is None:
        raise DomainError(f"{context} requires a certified Cheeger constant")
    helpers.require_greater("cheeger", cheeger, 0.0, context)
    if alpha == 1.0:
        bound_fn = lambda t: 0.5 * math.exp(-t / cheeger)
        law = "laplace"
    else:
        params = ExtremalParams(alpha, cheeger)
        bound_fn = lambda t: float(extremal_tail(params, t))
        law = "extremal"
    thresholds = [float(t) for t in thresholds]
    if any(t < 0.0 for t in thresholds):
        raise DomainError(f"{context} takes thresholds t >= 0")

    median = measure.median
    reports = []
    for side in sides:
        if side not in ("upper", "lower"):
            raise DomainError(f"unknown tail side '{side}'")
        function = LinearFn([1.0]) if side == "upper" else LinearFn([-1.0])
        plan_seed = derive_seed(seed, f"tails:{side}")
        plan = _plan(measure, 1, function, samples, plan_seed, batches, workers, confidence)
        tails = run_plan(plan, thresholds=sorted(thresholds)).tails
        for est in tails:
            t = est.threshold
            bound = bound_fn(t)
            exact = float(measure.tail(median + t)) if side == "upper" else float(measure.cdf(median - t))
            attained = abs(exact - bound) <= ATTAINED_REL_TOL * bound
            config = {"law": law, "alpha": alpha, "cheeger": cheeger, "side": side, "threshold": t,
                      **plan.describe()}
            extras = {"exact_tail": exact, "center": est.center}
            label = f"P(f - m >= {t:g})" if side == "upper" else f"P(f - m <= -{t:g})"
            make = equality_report if attained else bound_report
            reports.append(make("tail_bound", label, est.probability, bound, ci_low=est.ci_low,
                                ci_high=est.ci_high, config=config, seed=plan_seed, samples=samples,
                                extras=extras))
    return ExperimentResult(name="verify-tails", reports=reports, plot_rows=[],
                            plot_columns=["side", "threshold", "probability", "ci_low", "ci_high", "bound"])


# --- Isoperimetry ---

def _box(box, name):
    arr = np.asarray(box, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError(f"box {name} must be a list of [lo, hi] pairs")
    if np.any(arr[:, 0] > arr[:, 1]) or np.any(np.isnan(arr)):
        raise DomainError(f"box {name} has an empty side")
    return arr


def box_measure(measure, box):
    """mu^n of an axis-aligned box: a product of one-dimensional cdf differences."""
    box = _box(box, "A")
    lo = np.asarray(measure.cdf(box[:, 0]), dtype=float)
    hi = np.asarray(measure.cdf(box[:, 1]), dtype=float)
    return float(np.prod(hi - lo))


def box_distance(box_a, box_b):
    """Euclidean distance between two boxes from their coordinate-wise gaps."""
    a, b = _box(box_a, "A"), _box(box_b, "B")
    if a.shape != b.shape:
        raise DomainError(f"boxes of different dimension ({a.shape[0]} and {b.shape[0]})")
    gaps = np.maximum(0.0, np.maximum(b[:, 0] - a[:, 1], a[:, 0] - b[:, 1]))
    return float(np.sqrt((gaps ** 2).sum()))


def verify_isoperimetric(measure, certificate, box_a, box_b, alpha=None):
    """d(A, B) <= n^((1-alpha)/2) sqrt(C2 / (mu^n(A) mu^n(B))), all terms exact."""
    context = "the isoperimetric bound"
    value, alpha, _ = _certificate(certificate, alpha, ("C2",), context)
    distance = box_distance(box_a, box_b)
    n = len(box_a)
    mass_a, mass_b = box_measure(measure, box_a), box_measure(measure, box_b)
    if mass_a <= 0.0 or mass_b <= 0.0:
        raise DomainError(f"{context} requires boxes of positive measure (got {mass_a:.3g}, {mass_b:.3g})")
    rhs = n ** ((1.0 - alpha) / 2.0) * math.sqrt(value / (mass_a * mass_b))
    report = bound_report(
        "isoperimetric", f"d(A, B) <= n^((1-alpha)/2) sqrt(C2 / (mu(A) mu(B))), n={n}", distance, rhs,
        config={"alpha": alpha, "constant": value, "measure": measure.describe(),
                "box_a": np.asarray(box_a, dtype=float).tolist(), "box_b": np.asarray(box_b, dtype=float).tolist()},
        extras={"mass_a": mass_a, "mass_b": mass_b},
    )
    return ExperimentResult(name="verify-isoperimetric", reports=[report], plot_rows=[])


# --- Classical Poincare on d_p ---

def _variance_of(measure):
    _, variance = measure.analytic_moments()
    if variance is None:
        _, variance = numeric_moments(measure)
    return variance


def verify_sharp_poincare_dp(measure, poincare_constant, p, dims, samples=DEFAULT_SAMPLES, seed=1,
                             batches=DEFAULT_BATCHES, workers=1, confidence=EQUALITY_CONFIDENCE,
                             slope_tolerance=SHARP_SLOPE_TOLERANCE):
    """
    The scaled sum attains Var = n^(1-2(p-1)/p) Var_mu(x); every d_p 1-Lipschitz
    f stays below C_P n^((2-p)/p) (sum_i E|d_i f|^(p/(p-1)))^(2(p-1)/p).
    """
    context = "the sharp d_p Poincare bound"
    if not 1.0 < p <= 2.0:
        raise DomainError(f"{context} requires 1 < p <= 2 (got p={p!r})")
    helpers.require_greater("poincare_constant", poincare_constant, 0.0, context)
    dims = [int(n) for n in ([dims] if isinstance(dims, int) else dims)]
    variance_mu = _variance_of(measure)
    dual = helpers.dual_exponent(p)
    power = 2.0 / dual

    reports, rows, variances = [], [], []
    for n in dims:
        plan_seed = derive_seed(seed, f"sharp-dp:{p}:{n}")
        plan = _plan(measure, n, ScaledSumFn(n, p), samples, plan_seed, batches, workers, confidence)
        result = run_plan(plan, q=dual, coordinatewise=True)
        est, grad = result.variance, result.gradient
        target = n ** (1.0 - power) * variance_mu
        rhs = poincare_constant * n ** ((2.0 - p) / p) * grad.ci_low ** power
        config = {"p": p, "poincare_constant": poincare_constant, **plan.describe()}
        reports.append(equality_report(
            "sharp_poincare_dp_attained", f"Var(scaled sum) = n^(1-2(p-1)/p) Var_mu, n={n}",
            est.variance, target, ci_low=est.ci_low, ci_high=est.ci_high,
            config=config, seed=plan_seed, samples=est.n_samples,
        ))
        reports.append(bound_report(
            "sharp_poincare_dp", f"Var <= C_P n^((2-p)/p) (sum E|d_i f|^(p/(p-1)))^(2(p-1)/p), n={n}",
            est.variance, rhs, ci_low=est.ci_low, ci_high=est.ci_high,
            config=config, seed=plan_seed, samples=est.n_samples,
            extras={"coordinate_moment_sum": grad.value},
        ))
        rows.append([n, est.variance, est.ci_low, est.ci_high, rhs])
        variances.append(est.variance)

    summary = {"variance_mu": variance_mu, "exponent": (2.0 - p) / p}
    if len(dims) >= 3:
        fit = scaling_fit(dims, variances, min_points=3)
        reports.append(equality_report(
            "sharp_poincare_dp_scaling", "log-log slope of Var = (2-p)/p", fit.slope, (2.0 - p) / p,
            tolerance=slope_tolerance, config={"p": p, "dims": dims}, seed=seed,
            extras={"intercept": fit.intercept, "r_squared": fit.r_squared},
        ))
        summary["slope"] = fit.slope
    return ExperimentResult(name="verify-poincare-dp", reports=reports, plot_rows=rows, summary=summary)


# --- Random matrices ---

def _eigenvalue_block(lam, n, seed, start, stop, index):
    matrices = [linalg.random_pareto_matrix(lam, n, seed, k) for k in range(start, stop)]
    return linalg.eigenvalues_batch(matrices)[:, index - 1]


def sample_eigenvalues(lam, n, seed, trials, eigen_index=1, workers=1):
    """Eigenvalue number eigen_index (1 = largest) of `trials` independent Pareto matrices."""
    blocks = [(s, min(s + TRIAL_BLOCK, trials)) for s in range(0, trials, TRIAL_BLOCK)]
    args = [(lam, n, seed, s, e, eigen_index) for s, e in blocks]
    if workers and workers > 1 and len(blocks) > 1:
        with mp.Pool(processes=workers) as pool:
            pending = [pool.apply_async(_eigenvalue_block, a) for a in args]
            parts = [r.get() for r in pending]
    else:
        parts = [_eigenvalue_block(*a) for a in args]
    return np.concatenate(parts)


def verify_random_matrix(lam, n, trials=DEFAULT_TRIALS, seed=1, eigen_index=1, workers=1,
                         batches=DEFAULT_TRIAL_BATCHES, confidence=DEFAULT_CONFIDENCE):
    """Var(lambda_i) <= 2 C(lambda) (n(n-1)/2)^(2/(lambda-1)); the n(n+1)/2 variant rides along."""
    start_time = time.time()
    context = "the random matrix bound"
    helpers.require_greater("lambda", lam, 3.0, context)
    n, trials, eigen_index = int(n), int(trials), int(eigen_index)
    if not 2 <= n <= MAX_MATRIX_ORDER:
        raise DomainError(f"{context} requires 2 <= n <= {MAX_MATRIX_ORDER} (got n={n})")
    if trials < MIN_TRIALS:
        raise DomainError(f"{context} requires trials >= {MIN_TRIALS} (got trials={trials})")
    if not 1 <= eigen_index <= n:
        raise DomainError(f"{context} requires 1 <= eigen_index <= n (got {eigen_index})")
    if trials < 2 * batches:
        raise DomainError(f"{context} requires trials >= 2 * batches (got {trials}, {batches})")

    values = sample_eigenvalues(lam, n, seed, trials, eigen_index, workers)
    variance = float(values.var(ddof=1))
    groups = np.array_split(values, batches)
    half = batch_halfwidth([g.var(ddof=1) for g in groups], confidence)

    c_lambda = constants.pareto_C_lambda(lam).value
    exponent = 2.0 / (lam - 1.0)
    rhs = 2.0 * c_lambda * (n * (n - 1) / 2.0) ** exponent
    rhs_full = 2.0 * c_lambda * (n * (n + 1) / 2.0) ** exponent
    report = bound_report(
        "random_matrix", f"Var(lambda_{eigen_index}) <= 2 C(lambda) (n(n-1)/2)^(2/(lambda-1)), n={n}",
        variance, rhs, ci_low=max(0.0, variance - half), ci_high=variance + half,
        config={"lambda": lam, "n": n, "trials": trials, "eigen_index": eigen_index,
                "batches": batches, "confidence": confidence},
        seed=seed, samples=trials,
        extras={"rhs_full_dimension": rhs_full, "mean_eigenvalue": float(values.mean())},
    )
    print(f"[VERIFY] Random matrices n={n}, {trials} trials: Var(lambda_{eigen_index})={variance:.6g} "
          f"<= {rhs:.6g}? (took {helpers.elapsed_ms(start_time):.2f}ms)")
    return ExperimentResult(name="verify-matrix", reports=[report],
                            plot_rows=[[n, variance, report.ci_low, report.ci_high, rhs]])


# --- Tightness of the exponents ---

def activation_moments(lam, m):
    """Closed-form moments of f_m(x) = (x - m)_+ under mu_lambda, m >= 1."""
    mean = m ** (2.0 - lam) / (lam - 2.0)
    second = 2.0 * m ** (3.0 - lam) / ((lam - 2.0) * (lam - 3.0))
    gradient = m ** (1.0 - lam)  # |f'| is the indicator of x > m, so both moments coincide
    return {"mean": mean, "second": second, "variance": second - mean ** 2,
            "gradient_l1": gradient, "gradient_l2": gradient}


def activation_moments_quadrature(lam, m):
    density = lambda x: (lam - 1.0) * x ** (-lam)
    mean = integrate_fn(lambda x: (x - m) * density(x), m, math.inf)
    second = integrate_fn(lambda x: (x - m) ** 2 * density(x), m, math.inf)
    gradient = integrate_fn(density, m, math.inf)
    return {"mean": mean, "second": second, "variance": second - mean ** 2,
            "gradient_l1": gradient, "gradient_l2": gradient}


def _activation_abs_deviation(measure, m, closed):
    """E|f_m - median(f_m)|."""
    median = max(measure.median - m, 0.0)
    if median == 0.0:
        return closed["mean"]
    density = lambda x: float(measure.density(x))
    level = m + median
    return integrate_fn(lambda x: abs(max(x - m, 0.0) - median) * density(x), 1.0, math.inf,
                        anchor=level)


def _increasing_violations(values):
    return int(np.sum(np.diff(np.asarray(values, dtype=float)) <= 0.0))


def tightness_report(alpha, m_values, alpha1=None, alpha2=None):
    """
    The activation family f_m under mu_{1/(1-alpha)} shows that the L2 and L1
    Cheeger exponents cannot be raised: Var / (E|f'|^2)^alpha1 and
    E|f - m| / (E|f'|)^alpha2 grow without bound once alpha1 > (3 alpha - 2)/alpha
    and alpha2 > (2 alpha - 1)/alpha.
    """
    context = "the tightness construction"
    helpers.require_open("alpha", alpha, 2.0 / 3.0, 1.0, context, lo_text="2/3")
    m_values = [float(m) for m in m_values]
    if len(m_values) < 3 or min(m_values) < 1.0:
        raise DomainError(f"{context} needs at least 3 values m >= 1")
    lam = 1.0 / (1.0 - alpha)
    l2_critical = (3.0 * alpha - 2.0) / alpha
    l1_critical = (2.0 * alpha - 1.0) / alpha
    alpha1 = l2_critical + 0.1 if alpha1 is None else float(alpha1)
    alpha2 = l1_critical + 0.05 if alpha2 is None else float(alpha2)
    if not alpha1 > l2_critical:
        raise DomainError(f"{context} requires alpha1 > (3 alpha - 2)/alpha = {l2_critical:g} (got {alpha1!r})")
    if not alpha2 > l1_critical:
        raise DomainError(f"{context} requires alpha2 > (2 alpha - 1)/alpha = {l1_critical:g} (got {alpha2!r})")

    measure = ParetoMeasure(lam)
    config = {"alpha": alpha, "lambda": lam, "m_values": m_values, "alpha1": alpha1, "alpha2": alpha2}
    reports, rows = [], []
    variances, gradients, l2_ratios, l1_ratios = [], [], [], []
    for m in m_values:
        closed = activation_moments(lam, m)
        numeric = activation_moments_quadrature(lam, m)
        worst = max(abs(closed[k] - numeric[k]) for k in closed)
        reports.append(bound_report("tightness_closed_form", f"closed forms vs quadrature, m={m:g}",
                                    worst, CLOSED_FORM_TOL, config=config,
                                    extras={k: closed[k] for k in closed}))
        l2_ratio = closed["variance"] / closed["gradient_l2"] ** alpha1
        l1_ratio = _activation_abs_deviation(measure, m, closed) / closed["gradient_l1"] ** alpha2
        variances.append(closed["variance"])
        gradients.append(closed["gradient_l2"])
        l2_ratios.append(l2_ratio)
        l1_ratios.append(l1_ratio)
        rows.append([m, closed["variance"], closed["gradient_l2"], l2_ratio, l1_ratio])

    for quantity, series, expected in (("Var", variances, -(3.0 * alpha - 2.0) / (1.0 - alpha)),
                                       ("E|f'|^2", gradients, -alpha / (1.0 - alpha))):
        fit = scaling_fit(m_values, series, min_points=3)
        reports.append(equality_report(
            "tightness_slope", f"log-log slope of {quantity} in m", fit.slope, expected,
            tolerance=TIGHTNESS_SLOPE_REL_TOL * abs(expected), config=config,
            extras={"r_squared": fit.r_squared},
        ))
    reports.append(bound_report("tightness_l2_divergence", "Var / (E|f'|^2)^alpha1 increasing in m",
                                _increasing_violations(l2_ratios), 0.0, config=config,
                                extras={"first": l2_ratios[0], "last": l2_ratios[-1]}))
    reports.append(bound_report("tightness_l1_divergence", "E|f - m(f)| / (E|f'|)^alpha2 increasing in m",
                                _increasing_violations(l1_ratios), 0.0, config=config,
                                extras={"first": l1_ratios[0], "last": l1_ratios[-1]}))
    return ExperimentResult(name="tightness", reports=reports, plot_rows=rows,
                            plot_columns=["m", "variance", "gradient_moment", "l2_ratio", "l1_ratio"],
                            summary={"lambda": lam, "l2_critical": l2_critical, "l1_critical": l1_critical})


def exponent_comparison_report(alpha):
    """The product-measure exponent 2(1-alpha)/alpha beats Efron-Stein and the d_p route."""
    helpers.require_open("alpha", alpha, 2.0 / 3.0, 1.0, "the exponent comparison", lo_text="2/3")
    exponents = constants.exponent_comparison(alpha)
    config = {"alpha": alpha}
    reports = [
        bound_report("exponent_comparison", "2(1-alpha)/alpha <= 1 (Efron-Stein)",
                     exponents["l2_product"], exponents["efron_stein"], config=config),
        bound_report("exponent_comparison", "2(1-alpha)/alpha <= (4-3 alpha)/2 (d_p route)",
                     exponents["l2_product"], exponents["l1_dp_route"], config=config),
    ]
    return ExperimentResult(name="exponents", reports=reports, summary=exponents)
