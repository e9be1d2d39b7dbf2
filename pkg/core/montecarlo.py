"""
Monte Carlo estimation under product measures.

A plan of N draws of (X_1, ..., X_n) is cut into B batches; batch b reads the
uniform stream (seed, b), so each batch is reproducible on its own and the
index-ordered reduction gives the same numbers for any worker count.
"""

import math
import multiprocessing as mp
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from . import helpers
from .errors import DomainError
from .streams import UniformStream

DEFAULT_BATCHES = 32
DEFAULT_MEMORY_BUDGET = 4_000_000
DEFAULT_CONFIDENCE = 0.95
MIN_SCALING_POINTS = 4


@dataclass
class EstimationPlan:
    measure: object
    dimension: int
    function: object
    samples: int
    seed: int
    batches: int = DEFAULT_BATCHES
    memory_budget: int = DEFAULT_MEMORY_BUDGET
    workers: int = 1
    confidence: float = DEFAULT_CONFIDENCE

    def __post_init__(self):
        self.dimension = int(self.dimension)
        self.samples = int(self.samples)
        self.batches = int(self.batches)
        if self.dimension < 1:
            raise DomainError(f"an estimation plan requires dimension >= 1 (got {self.dimension})")
        if self.batches < 2:
            raise DomainError(f"an estimation plan requires at least 2 batches (got {self.batches})")
        if self.samples < 2 * self.batches:
            raise DomainError(f"an estimation plan requires N >= 2B (got N={self.samples}, B={self.batches})")
        arity = getattr(self.function, "arity", None)
        if arity is not None and arity != self.dimension:
            raise DomainError(f"function takes {arity} coordinates but the plan has dimension {self.dimension}")
        if not 0.0 < self.confidence < 1.0:
            raise DomainError(f"confidence must lie in (0, 1) (got {self.confidence!r})")

    def batch_sizes(self):
        """Sizes differing by at most one; the first N mod B batches take the extra draw."""
        base, extra = divmod(self.samples, self.batches)
        return [base + (1 if b < extra else 0) for b in range(self.batches)]

    def describe(self):
        return {
            "measure": self.measure.describe(),
            "dimension": self.dimension,
            "function": self.function.describe(),
            "samples": self.samples,
            "seed": self.seed,
            "batches": self.batches,
            "confidence": self.confidence,
        }


@dataclass
class VarianceEstimate:
    mean: float
    variance: float
    ci_low: float
    ci_high: float
    n_samples: int
    seed: int
    batch_median_variance: float = 0.0
    batches: int = DEFAULT_BATCHES


@dataclass
class MeanEstimate:
    value: float
    ci_low: float
    ci_high: float
    n_samples: int


@dataclass
class GradientMomentEstimate:
    """E|grad f|^q (Euclidean norm), or per-coordinate E|d_i f|^q with their sum."""
    q: float
    value: float
    ci_low: float
    ci_high: float
    coordinates: Optional[np.ndarray] = None


@dataclass
class TailEstimate:
    threshold: float
    probability: float
    ci_low: float
    ci_high: float
    center: float


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass
class MonteCarloResult:
    variance: VarianceEstimate
    mean: MeanEstimate
    gradient: Optional[GradientMomentEstimate] = None
    tails: list = field(default_factory=list)


# --- Batch kernel ---

def _draw_batch(plan, b, size):
    """Yields the sample rows of batch b in chunks that fit the memory budget."""
    stream = UniformStream(plan.seed, b)
    rows_per_chunk = max(1, plan.memory_budget // plan.dimension)
    done = 0
    while done < size:
        rows = min(rows_per_chunk, size - done)
        u = stream.next(rows * plan.dimension).reshape(rows, plan.dimension)
        X = np.asarray(plan.measure.quantile(u), dtype=float).reshape(rows, plan.dimension)
        yield X
        done += rows


def _run_batch(plan, b, size, q, coordinatewise, keep_values):
    values_parts, grad_parts, coord_parts = [], [], []
    for X in _draw_batch(plan, b, size):
        values_parts.append(np.asarray(plan.function.values(X), dtype=float))
        if q is not None:
            grads = np.abs(np.asarray(plan.function.gradients(X), dtype=float))
            if coordinatewise:
                powered = np.power(grads, q)
                coord_parts.append(powered.sum(axis=0))
                grad_parts.append(powered.sum(axis=1))
            else:
                grad_parts.append(np.power(np.sqrt((grads ** 2).sum(axis=1)), q))
    values = np.concatenate(values_parts)
    if values.min() == values.max():
        mean, m2 = float(values[0]), 0.0
    else:
        mean = float(values.mean())
        m2 = float(((values - mean) ** 2).sum())
    result = {"count": values.size, "mean": mean, "m2": m2}
    if q is not None:
        grad_values = np.concatenate(grad_parts)
        result["grad_mean"] = float(grad_values.mean())
        if coordinatewise:
            result["coord_sum"] = np.sum(coord_parts, axis=0)
    if keep_values:
        result["values"] = values
    return result


def batch_halfwidth(batch_stats, confidence):
    """t_{(1+c)/2, B-1} * sd / sqrt(B) for a vector of per-batch statistics."""
    batch_stats = np.asarray(batch_stats, dtype=float)
    count = batch_stats.size
    spread = float(batch_stats.std(ddof=1)) if count > 1 else 0.0
    quantile = float(stats.t.ppf(0.5 + confidence / 2.0, count - 1))
    return quantile * spread / math.sqrt(count)


def run_plan(plan, q=None, coordinatewise=False, thresholds=None, center=True):
    """One pass over the plan; variance always, gradient moment and tails on request."""
    start_time = time.time()
    if thresholds is not None:
        thresholds = np.asarray(thresholds, dtype=float)
        if np.any(np.diff(thresholds) < 0.0):
            raise DomainError("tail thresholds must be sorted")
    keep_values = thresholds is not None
    sizes = plan.batch_sizes()
    args = [(plan, b, sizes[b], q, coordinatewise, keep_values) for b in range(plan.batches)]

    if plan.workers and plan.workers > 1:
        with mp.Pool(processes=plan.workers) as pool:
            pending = [pool.apply_async(_run_batch, a) for a in args]
            batches = [r.get() for r in pending]
    else:
        batches = [_run_batch(*a) for a in args]

    # Chan et al. pairwise merge, in batch order
    count, mean, m2 = 0, 0.0, 0.0
    for s in batches:
        if count == 0:
            count, mean, m2 = s["count"], s["mean"], s["m2"]
            continue
        total = count + s["count"]
        delta = s["mean"] - mean
        mean = mean + delta * s["count"] / total
        m2 = m2 + s["m2"] + delta * delta * count * s["count"] / total
        count = total
    variance = m2 / (count - 1)

    batch_vars = np.array([s["m2"] / (s["count"] - 1) for s in batches])
    half = batch_halfwidth(batch_vars, plan.confidence)
    variance_estimate = VarianceEstimate(
        mean=mean, variance=variance,
        ci_low=max(0.0, variance - half), ci_high=variance + half,
        n_samples=count, seed=plan.seed,
        batch_median_variance=float(np.median(batch_vars)), batches=plan.batches,
    )
    batch_means = np.array([s["mean"] for s in batches])
    mean_half = batch_halfwidth(batch_means, plan.confidence)
    mean_estimate = MeanEstimate(value=mean, ci_low=mean - mean_half, ci_high=mean + mean_half, n_samples=count)

    gradient = None
    if q is not None:
        grad_means = np.array([s["grad_mean"] for s in batches])
        # centre of the batch-means interval
        value = float(grad_means.mean())
        ghalf = batch_halfwidth(grad_means, plan.confidence)
        coords = None
        if coordinatewise:
            coords = np.sum([s["coord_sum"] for s in batches], axis=0) / count
        gradient = GradientMomentEstimate(q=q, value=value, ci_low=max(0.0, value - ghalf),
                                          ci_high=value + ghalf, coordinates=coords)

    tails = []
    if keep_values:
        values = np.concatenate([s["values"] for s in batches])
        tails = _tail_estimates(values, thresholds, center, plan.confidence)

    print(f"[MC] {plan.function.name} on {plan.measure.name}^{plan.dimension}: "
          f"Var={variance:.6g} [{variance_estimate.ci_low:.6g}, {variance_estimate.ci_high:.6g}] "
          f"N={count} B={plan.batches} (took {helpers.elapsed_ms(start_time):.2f}ms)")
    return MonteCarloResult(variance=variance_estimate, mean=mean_estimate, gradient=gradient, tails=tails)


def _wilson(k, n, confidence):
    ci = stats.binomtest(int(k), int(n)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _tail_estimates(values, thresholds, center, confidence):
    shift = float(np.median(values)) if center else 0.0
    centered = np.sort(values - shift)
    n = centered.size
    out = []
    for t in thresholds:
        k = n - int(np.searchsorted(centered, t, side="left"))
        low, high = _wilson(k, n, confidence)
        out.append(TailEstimate(threshold=float(t), probability=k / n, ci_low=low, ci_high=high, center=shift))
    return out


# --- Public estimators ---

def estimate_variance(plan):
    return run_plan(plan).variance


def estimate_mean(plan):
    return run_plan(plan).mean


def estimate_gradient_moment(plan, q=2.0, coordinatewise=False):
    if q < 1.0:
        raise DomainError(f"gradient moments require q >= 1 (got q={q!r})")
    return run_plan(plan, q=q, coordinatewise=coordinatewise).gradient


def estimate_tail(plan, thresholds, center=True):
    return run_plan(plan, thresholds=thresholds, center=center).tails


def scaling_fit(dimensions, variances, min_points=MIN_SCALING_POINTS):
    """Least-squares line through (log n, log variance)."""
    dims = np.asarray(dimensions, dtype=float)
    var = np.asarray(variances, dtype=float)
    if dims.size != var.size:
        raise DomainError("scaling fit needs one variance per dimension")
    if dims.size < min_points:
        raise DomainError(f"scaling fit requires at least {min_points} points (got {dims.size})")
    if np.any(var <= 0.0) or np.any(dims <= 0.0):
        raise DomainError("scaling fit requires positive dimensions and variances")
    fit = stats.linregress(np.log(dims), np.log(var))
    return ScalingFit(slope=float(fit.slope), intercept=float(fit.intercept), r_squared=float(fit.rvalue ** 2))
