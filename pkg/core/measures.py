"""
One-dimensional probability laws used throughout the library.

Every law exposes density / cdf / quantile / tail on numpy arrays or scalars
and is sampled by pushing a counter-based uniform stream through its quantile,
so a (seed, count) pair always yields the same draws.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from . import helpers
from .errors import DomainError
from .quadrature import integrate_fn
from .streams import uniform_stream

DENSITY_PROBES = 257
DENSITY_TABLE_NODES = 64


def _as_output(values, like):
    """Returns a float for scalar input, an ndarray otherwise."""
    if np.ndim(like) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class ParetoParams:
    lam: float

    def __post_init__(self):
        helpers.require_greater("lambda", self.lam, 1.0, "the Pareto law")


@dataclass(frozen=True)
class ExtremalParams:
    """Parameters of the median-centered extremal law X(alpha, I); a and b are derived."""
    alpha: float
    cheeger: float
    a: float = field(init=False)
    b: float = field(init=False)

    def __post_init__(self):
        helpers.require_open("alpha", self.alpha, 0.0, 1.0, "the extremal law")
        helpers.require_greater("cheeger", self.cheeger, 0.0, "the extremal law")
        alpha = float(self.alpha)
        a = ((1.0 - alpha) / alpha) * self.cheeger ** (-1.0 / alpha) * 2.0 ** ((alpha - 1.0) / alpha)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", 1.0 / (1.0 - alpha))

    @property
    def scale(self):
        """K = I^{1/alpha} alpha/(1-alpha), the prefactor of the quantile branches."""
        return self.cheeger ** (1.0 / self.alpha) * self.alpha / (1.0 - self.alpha)

    @property
    def rate(self):
        return (1.0 - self.alpha) / self.alpha


class Measure1D:
    """Base class: subclasses provide density, cdf and quantile on arrays."""

    name = "measure"
    support = (-math.inf, math.inf)

    def density(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def quantile(self, p):
        raise NotImplementedError

    def tail(self, x):
        """P(X >= x); subclasses override with a closed form where cancellation matters."""
        x_arr = np.asarray(x, dtype=float)
        return _as_output(1.0 - np.asarray(self.cdf(x_arr), dtype=float), x)

    def analytic_moments(self):
        """(mean, variance) with None for moments that are infinite or unknown."""
        return None, None

    @property
    def median(self):
        return float(self.quantile(0.5))

    def sample(self, seed, count, stream=0):
        return sample(self, seed, count, stream=stream)

    def describe(self):
        return {"measure": self.name}


class ParetoMeasure(Measure1D):
    """mu_lambda: density (lambda-1) x^(-lambda) on [1, inf)."""

    name = "pareto"

    def __init__(self, params):
        if not isinstance(params, ParetoParams):
            params = ParetoParams(float(params))
        self.params = params
        self.lam = float(params.lam)
        self.support = (1.0, math.inf)

    def density(self, x):
        x_arr = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            values = np.where(x_arr >= 1.0, (self.lam - 1.0) * np.power(x_arr, -self.lam), 0.0)
        return _as_output(values, x)

    def cdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            values = np.where(x_arr >= 1.0, 1.0 - np.power(x_arr, 1.0 - self.lam), 0.0)
        return _as_output(values, x)

    def tail(self, x):
        x_arr = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            values = np.where(x_arr >= 1.0, np.power(x_arr, 1.0 - self.lam), 1.0)
        return _as_output(values, x)

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore"):
            values = np.power(1.0 - p_arr, -1.0 / (self.lam - 1.0))
        return _as_output(values, p)

    def analytic_moments(self):
        lam = self.lam
        mean = (lam - 1.0) / (lam - 2.0) if lam > 2.0 else None
        variance = (lam - 1.0) / (lam - 3.0) - mean ** 2 if lam > 3.0 else None
        return mean, variance

    def describe(self):
        return {"measure": self.name, "lambda": self.lam}


class LaplaceMeasure(Measure1D):
    """Two-sided exponential l_t(x) = t/2 exp(-t|x|)."""

    name = "laplace"

    def __init__(self, t):
        self.t = helpers.require_greater("t", t, 0.0, "the two-sided exponential law")

    def density(self, x):
        x_arr = np.asarray(x, dtype=float)
        return _as_output(0.5 * self.t * np.exp(-self.t * np.abs(x_arr)), x)

    def cdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        half = 0.5 * np.exp(-self.t * np.abs(x_arr))
        return _as_output(np.where(x_arr < 0.0, half, 1.0 - half), x)

    def tail(self, x):
        x_arr = np.asarray(x, dtype=float)
        half = 0.5 * np.exp(-self.t * np.abs(x_arr))
        return _as_output(np.where(x_arr >= 0.0, half, 1.0 - half), x)

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lower = np.log(2.0 * p_arr) / self.t
            upper = -np.log(2.0 * (1.0 - p_arr)) / self.t
        return _as_output(np.where(p_arr < 0.5, lower, upper), p)

    def analytic_moments(self):
        return 0.0, 2.0 / self.t ** 2

    def describe(self):
        return {"measure": self.name, "t": self.t}


class ExtremalMeasure(Measure1D):
    """
    The law whose quantile derivative equals (I / min{p, 1-p})^(1/alpha).

    Its density is (a(b-1)/2)(a|x| + 1)^(-b); with a minus sign inside the
    bracket the density would not integrate to one.
    """

    name = "extremal"

    def __init__(self, params):
        self.params = params
        self.alpha = params.alpha
        self.cheeger = params.cheeger

    def density(self, x):
        a, b = self.params.a, self.params.b
        x_arr = np.asarray(x, dtype=float)
        values = 0.5 * a * (b - 1.0) * np.power(a * np.abs(x_arr) + 1.0, -b)
        return _as_output(values, x)

    def _half_tail(self, x_abs):
        a, b = self.params.a, self.params.b
        return 0.5 * np.power(a * x_abs + 1.0, 1.0 - b)

    def cdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        half = self._half_tail(np.abs(x_arr))
        return _as_output(np.where(x_arr < 0.0, half, 1.0 - half), x)

    def tail(self, x):
        x_arr = np.asarray(x, dtype=float)
        half = self._half_tail(np.abs(x_arr))
        return _as_output(np.where(x_arr >= 0.0, half, 1.0 - half), x)

    def quantile(self, p):
        scale, rate = self.params.scale, self.params.rate
        p_arr = np.asarray(p, dtype=float)
        shift = 2.0 ** rate
        with np.errstate(divide="ignore", invalid="ignore"):
            upper = scale * (np.power(1.0 - p_arr, -rate) - shift)
            lower = -scale * (np.power(p_arr, -rate) - shift)
        return _as_output(np.where(p_arr >= 0.5, upper, lower), p)

    def analytic_moments(self):
        a, b = self.params.a, self.params.b
        mean = 0.0 if b > 2.0 else None
        variance = 2.0 / (a * a * (b - 2.0) * (b - 3.0)) if b > 3.0 else None
        return mean, variance

    def describe(self):
        return {"measure": self.name, "alpha": self.alpha, "cheeger": self.cheeger}


class DensityMeasure(Measure1D):
    """
    A law given only by a density on an interval.

    The cdf is a table of cumulative masses at fixed nodes plus one quadrature
    from the nearest node; the quantile is a bracketed root of the cdf.
    """

    name = "density"

    def __init__(self, density_fn, support, label="density"):
        start_time = time.time()
        lo, hi = float(support[0]), float(support[1])
        if not lo < hi:
            raise DomainError(f"a density measure requires support lo < hi (got [{lo}, {hi}])")
        self.support = (lo, hi)
        self.label = label
        self._raw = np.vectorize(density_fn, otypes=[float])
        self._scale = 1.0
        self._nodes = self._build_nodes(lo, hi)
        self._fill = float(self._nodes[len(self._nodes) // 2])
        self._check_nonnegative()

        pieces = [integrate_fn(self._unscaled_scalar, x0, x1)
                  for x0, x1 in zip(self._nodes[:-1], self._nodes[1:])]
        total = float(np.sum(pieces))
        if not math.isfinite(total) or total <= 0.0:
            raise DomainError("a density measure requires a positive integrable density")
        if abs(total - 1.0) > helpers.NORMALIZATION_TOL:
            raise DomainError(f"density integrates to {total:.10g}, not 1 (tolerance {helpers.NORMALIZATION_TOL:g})")
        self._scale = 1.0 / total
        self._table = np.concatenate(([0.0], np.cumsum(pieces))) * self._scale
        self._table[-1] = 1.0

        print(f"[MEASURES] Built density measure '{label}' on [{lo:g}, {hi:g}] "
              f"(mass={total:.12f}, took {helpers.elapsed_ms(start_time):.2f}ms)")

    @staticmethod
    def _build_nodes(lo, hi):
        if math.isfinite(lo) and math.isfinite(hi):
            return np.linspace(lo, hi, DENSITY_TABLE_NODES + 1)
        # Geometric spread on unbounded sides, the infinite end kept as the last node.
        steps = np.power(2.0, np.arange(DENSITY_TABLE_NODES)) - 1.0
        if math.isfinite(lo):
            return np.concatenate((lo + steps, [math.inf]))
        if math.isfinite(hi):
            return np.concatenate(([-math.inf], (hi - steps)[::-1]))
        right = steps[1:]
        return np.concatenate(([-math.inf], -right[::-1], [0.0], right, [math.inf]))

    def _probe_points(self):
        lo, hi = self.support
        u = (np.arange(DENSITY_PROBES) + 0.5) / DENSITY_PROBES
        if math.isfinite(lo) and math.isfinite(hi):
            return lo + (hi - lo) * u
        if math.isfinite(lo):
            return lo - 1.0 + 1.0 / (1.0 - u)
        if math.isfinite(hi):
            return hi + 1.0 - 1.0 / u
        return np.tan(math.pi * (u - 0.5))

    def _check_nonnegative(self):
        probes = self._probe_points()
        values = self._raw(probes)
        negative = np.flatnonzero(values < 0.0)
        if negative.size:
            x = probes[negative[0]]
            raise DomainError(f"density is negative at x={x:.6g} ({values[negative[0]]:.3g})")

    def _unscaled_scalar(self, x):
        return float(self._raw(x))

    def _scaled_scalar(self, x):
        return self._scale * float(self._raw(x))

    def density(self, x):
        x_arr = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x_arr >= lo) & (x_arr <= hi)
        values = np.where(inside, self._scale * self._raw(np.where(inside, x_arr, self._fill)), 0.0)
        return _as_output(values, x)

    def _cdf_scalar(self, x):
        lo, hi = self.support
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        idx = int(np.searchsorted(self._nodes, x, side="right")) - 1
        base = self._table[idx]
        node = self._nodes[idx]
        value = base + integrate_fn(self._scaled_scalar, node, x)
        return min(1.0, max(0.0, value))

    def cdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        values = np.array([self._cdf_scalar(v) for v in x_arr.ravel()]).reshape(x_arr.shape)
        return _as_output(values, x)

    def _quantile_scalar(self, p):
        if not 0.0 < p < 1.0:
            return self.support[0] if p <= 0.0 else self.support[1]
        idx = int(np.searchsorted(self._table, p, side="left"))
        idx = min(max(idx, 1), len(self._nodes) - 1)
        left, right = self._nodes[idx - 1], self._nodes[idx]
        if math.isinf(left):
            left = right - 1.0
            while self._cdf_scalar(left) > p:
                left = right - 2.0 * (right - left)
        if math.isinf(right):
            right = left + 1.0
            while self._cdf_scalar(right) < p:
                right = left + 2.0 * (right - left)
                if right > 1e300:
                    raise DomainError(f"quantile at p={p} could not be bracketed")
        return optimize.brentq(lambda x: self._cdf_scalar(x) - p, left, right,
                               xtol=helpers.ROOT_XTOL, rtol=4 * np.finfo(float).eps)

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        values = np.array([self._quantile_scalar(v) for v in p_arr.ravel()]).reshape(p_arr.shape)
        return _as_output(values, p)

    def describe(self):
        return {"measure": self.name, "label": self.label,
                "support": [self.support[0], self.support[1]]}


def pareto_measure(params):
    return ParetoMeasure(params)


def laplace_measure(t):
    return LaplaceMeasure(t)


def extremal_measure(params):
    return ExtremalMeasure(params)


def measure_from_density(density_fn, support, label="density"):
    return DensityMeasure(density_fn, support, label=label)


def sample(measure, seed, count, stream=0):
    """Inverse-transform draws; identical (seed, count, stream) gives identical output."""
    if int(count) < 1:
        raise DomainError(f"sampling requires count >= 1 (got count={count!r})")
    return np.asarray(measure.quantile(uniform_stream(seed, int(count), stream=stream)), dtype=float)


def tail(measure, x):
    return measure.tail(x)


def numeric_moments(measure):
    """(mean, variance) by adaptive quadrature; DomainError if either is infinite."""
    lo, hi = measure.support
    anchor = measure.median
    density = lambda x: float(measure.density(x))
    mean = integrate_fn(lambda x: x * density(x), lo, hi, anchor=anchor)
    variance = integrate_fn(lambda x: (x - mean) ** 2 * density(x), lo, hi, anchor=anchor)
    return mean, variance


def extremal_quantile_integral(params, p):
    """Q_X(p) as the integral of (I / min{y, 1-y})^(1/alpha) from 1/2 to p."""
    helpers.require_open("p", p, 0.0, 1.0, "the extremal quantile")
    integrand = lambda y: (params.cheeger / min(y, 1.0 - y)) ** (1.0 / params.alpha)
    return integrate_fn(integrand, 0.5, float(p))


def extremal_tail(params, t):
    """1/2 (a|t| + 1)^(1-b): the upper tail of X(alpha, I) at t >= 0."""
    t_arr = np.asarray(t, dtype=float)
    values = 0.5 * np.power(params.a * np.abs(t_arr) + 1.0, 1.0 - params.b)
    return _as_output(values, t)


def ks_distance(measure, samples):
    """Kolmogorov-Smirnov statistic between samples and the law's cdf."""
    return float(stats.kstest(np.asarray(samples, dtype=float), measure.cdf).statistic)


def _uniform(lo=0.0, hi=1.0):
    width = float(hi) - float(lo)
    if width <= 0.0:
        raise DomainError(f"the uniform law requires lo < hi (got [{lo}, {hi}])")
    return DensityMeasure(_UniformDensity(1.0 / width), (lo, hi), label="uniform")


class _UniformDensity:
    def __init__(self, height):
        self.height = height

    def __call__(self, x):
        return self.height


MEASURE_BUILDERS = {
    "pareto": lambda lam=5.0: ParetoMeasure(ParetoParams(float(lam))),
    "laplace": lambda t=1.0: LaplaceMeasure(float(t)),
    "extremal": lambda alpha=0.8, cheeger=1.0: ExtremalMeasure(ExtremalParams(float(alpha), float(cheeger))),
    "uniform": _uniform,
}


def build_measure(name, **params):
    """Looks up a law by name; keyword names are lam, t, alpha, cheeger, lo, hi."""
    builder = MEASURE_BUILDERS.get(name)
    if builder is None:
        raise DomainError(f"unknown measure '{name}' (known: {', '.join(sorted(MEASURE_BUILDERS))})")
    try:
        return builder(**params)
    except TypeError as e:
        raise DomainError(f"bad parameters for measure '{name}': {e}") from e
