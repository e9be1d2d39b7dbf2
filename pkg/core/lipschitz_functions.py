"""
Lipschitz test functions.

Each function evaluates on a batch X of shape (N, n) and returns its
almost-everywhere gradient on the same batch. `metric` is the largest p for
which the function is 1-Lipschitz with respect to d_p (the bound then holds
for every smaller p as well, except where supports_metric says otherwise).
"""

import math

import numpy as np

from . import helpers
from .errors import DomainError
from .streams import uniform_stream

CERTIFY_TOL = 1e-12
KINK_BAND = 1e-5
FD_STEP = 1e-6
FD_REL_TOL = 1e-4


def dp_distance(x, y, p):
    """Row-wise d_p distance between two (N, n) batches."""
    diff = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    if p == math.inf:
        return diff.max(axis=1)
    return np.power(np.power(diff, p).sum(axis=1), 1.0 / p)


def _as_batch(X, arity):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None] if arity == 1 else X[None, :]
    if arity is not None and X.shape[1] != arity:
        raise DomainError(f"function expects {arity} coordinates (got {X.shape[1]})")
    return X


class LipschitzFn:
    name = "function"
    arity = None
    metric = 2.0
    lipschitz_constant = 1.0

    def values(self, X):
        raise NotImplementedError

    def gradients(self, X):
        raise NotImplementedError

    def kink_distance(self, X):
        """Distance from each row to the set where the gradient jumps."""
        X = _as_batch(X, self.arity)
        return np.full(X.shape[0], math.inf)

    def supports_metric(self, p):
        return p <= self.metric

    def __call__(self, x):
        return float(self.values(np.atleast_1d(np.asarray(x, dtype=float)))[0])

    def grad(self, x):
        return self.gradients(np.atleast_1d(np.asarray(x, dtype=float)))[0]

    def describe(self):
        return {"function": self.name}


class MaxFn(LipschitzFn):
    name = "max"
    metric = math.inf

    def __init__(self, n):
        self.arity = int(helpers.require_at_least("n", int(n), 1, "the maximum function"))

    def values(self, X):
        return _as_batch(X, self.arity).max(axis=1)

    def gradients(self, X):
        X = _as_batch(X, self.arity)
        grads = np.zeros_like(X)
        # argmax returns the lowest index among ties
        grads[np.arange(X.shape[0]), np.argmax(X, axis=1)] = 1.0
        return grads

    def kink_distance(self, X):
        X = _as_batch(X, self.arity)
        if self.arity == 1:
            return np.full(X.shape[0], math.inf)
        top2 = -np.partition(-X, 1, axis=1)[:, :2]
        return (top2[:, 0] - top2[:, 1]) / 2.0

    def describe(self):
        return {"function": self.name, "n": self.arity}


class ActivationFn(LipschitzFn):
    """f_m(x) = (x - m) for x >= m, else 0."""

    name = "activation"
    arity = 1
    metric = math.inf

    def __init__(self, m):
        self.m = helpers.require_at_least("m", float(m), 1.0, "the activation function")

    def values(self, X):
        X = _as_batch(X, 1)
        return np.maximum(X[:, 0] - self.m, 0.0)

    def gradients(self, X):
        X = _as_batch(X, 1)
        return (X > self.m).astype(float)

    def kink_distance(self, X):
        X = _as_batch(X, 1)
        return np.abs(X[:, 0] - self.m)

    def describe(self):
        return {"function": self.name, "m": self.m}


class ScaledSumFn(LipschitzFn):
    """n^(-(p-1)/p) * sum(x); its coordinate gradients have unit l_{p/(p-1)} norm."""

    name = "scaled_sum"

    def __init__(self, n, p):
        self.arity = int(helpers.require_at_least("n", int(n), 1, "the scaled sum"))
        if not (1.0 < p <= 2.0):
            raise DomainError(f"the scaled sum requires 1 < p <= 2 (got p={p!r})")
        self.metric = float(p)
        self.coefficient = self.arity ** (-(p - 1.0) / p)

    def values(self, X):
        return self.coefficient * _as_batch(X, self.arity).sum(axis=1)

    def gradients(self, X):
        X = _as_batch(X, self.arity)
        return np.full_like(X, self.coefficient)

    def describe(self):
        return {"function": self.name, "n": self.arity, "p": self.metric}


class DistanceToSetFn(LipschitzFn):
    """min{d_2(x, A), cap} for A a union of axis-aligned boxes."""

    name = "distance_to_set"

    def __init__(self, boxes, cap):
        if not boxes:
            raise DomainError("the distance function requires a nonempty set of boxes")
        self.cap = helpers.require_greater("cap", cap, 0.0, "the distance function")
        self.lows = np.array([np.atleast_1d(np.asarray(lo, dtype=float)) for lo, _ in boxes])
        self.highs = np.array([np.atleast_1d(np.asarray(hi, dtype=float)) for _, hi in boxes])
        if np.any(self.lows > self.highs):
            raise DomainError("the distance function requires lo <= hi in every box")
        self.arity = self.lows.shape[1]

    def _box_offsets(self, X):
        # (N, boxes, n): x minus its projection onto each box
        return X[:, None, :] - np.clip(X[:, None, :], self.lows[None], self.highs[None])

    def _box_distances(self, X):
        offsets = self._box_offsets(X)
        return offsets, np.sqrt((offsets ** 2).sum(axis=2))

    def values(self, X):
        X = _as_batch(X, self.arity)
        _, dist = self._box_distances(X)
        return np.minimum(dist.min(axis=1), self.cap)

    def gradients(self, X):
        X = _as_batch(X, self.arity)
        offsets, dist = self._box_distances(X)
        nearest = np.argmin(dist, axis=1)
        rows = np.arange(X.shape[0])
        d = dist[rows, nearest]
        active = (d > 0.0) & (d < self.cap)
        grads = np.zeros_like(X)
        grads[active] = offsets[rows[active], nearest[active]] / d[active, None]
        return grads

    def kink_distance(self, X):
        X = _as_batch(X, self.arity)
        _, dist = self._box_distances(X)
        ordered = np.sort(dist, axis=1)
        d = ordered[:, 0]
        band = np.abs(d - self.cap)
        if ordered.shape[1] > 1:
            band = np.minimum(band, (ordered[:, 1] - ordered[:, 0]) / 2.0)
        inside_margin = np.min(np.minimum(X[:, None, :] - self.lows[None], self.highs[None] - X[:, None, :]), axis=2)
        depth = np.max(inside_margin, axis=1)
        boundary = np.where(d > 0.0, d, np.abs(depth))
        return np.minimum(band, boundary)

    def describe(self):
        return {"function": self.name, "boxes": [[lo.tolist(), hi.tolist()] for lo, hi in zip(self.lows, self.highs)],
                "cap": self.cap}


class L2NormFn(LipschitzFn):
    name = "l2_norm"

    def __init__(self, n):
        self.arity = int(helpers.require_at_least("n", int(n), 1, "the Euclidean norm"))

    def values(self, X):
        return np.sqrt((_as_batch(X, self.arity) ** 2).sum(axis=1))

    def gradients(self, X):
        X = _as_batch(X, self.arity)
        norms = np.sqrt((X ** 2).sum(axis=1))
        grads = np.zeros_like(X)
        nonzero = norms > 0.0
        grads[nonzero] = X[nonzero] / norms[nonzero, None]
        return grads

    def kink_distance(self, X):
        return self.values(X)

    def describe(self):
        return {"function": self.name, "n": self.arity}


class LinearFn(LipschitzFn):
    name = "linear"

    def __init__(self, weights):
        self.weights = np.atleast_1d(np.asarray(weights, dtype=float))
        norm = float(np.sqrt((self.weights ** 2).sum()))
        if norm > 1.0 + CERTIFY_TOL:
            raise DomainError(f"the linear function requires |weights|_2 <= 1 (got {norm:.6g})")
        self.arity = self.weights.size

    def values(self, X):
        return _as_batch(X, self.arity) @ self.weights

    def gradients(self, X):
        X = _as_batch(X, self.arity)
        return np.broadcast_to(self.weights, X.shape).copy()

    def supports_metric(self, p):
        q = helpers.dual_exponent(p)
        return float(np.power(np.abs(self.weights), q).sum() ** (1.0 / q)) <= 1.0 + CERTIFY_TOL

    def describe(self):
        return {"function": self.name, "weights": self.weights.tolist()}


class ConstantFn(LipschitzFn):
    name = "constant"
    metric = math.inf
    lipschitz_constant = 0.0

    def __init__(self, n=1, value=0.0):
        self.arity = int(n)
        self.value = float(value)

    def values(self, X):
        X = _as_batch(X, self.arity)
        return np.full(X.shape[0], self.value)

    def gradients(self, X):
        return np.zeros_like(_as_batch(X, self.arity))

    def describe(self):
        return {"function": self.name, "n": self.arity, "value": self.value}


def max_fn(n):
    return MaxFn(n)


def activation_fn(m):
    return ActivationFn(m)


def scaled_sum_fn(n, p):
    return ScaledSumFn(n, p)


def distance_to_set_fn(boxes, cap):
    return DistanceToSetFn(boxes, cap)


def l2_norm_fn(n):
    return L2NormFn(n)


def linear_fn(weights):
    return LinearFn(weights)


# --- Certification ---

def _probe_points(fn, seed, count, radius, stream):
    u = uniform_stream(seed, count * fn.arity, stream=stream).reshape(count, fn.arity)
    return radius * (2.0 * u - 1.0)


def certify_lipschitz(fn, seed, pairs=10_000, p=None, radius=10.0):
    """Worst |f(x) - f(y)| / d_p(x, y) over seeded random pairs."""
    p = fn.metric if p is None else p
    X = _probe_points(fn, seed, pairs, radius, stream=0)
    Y = _probe_points(fn, seed, pairs, radius, stream=1)
    # half of the pairs are local so kinks get probed at small scale
    Y[: pairs // 2] = X[: pairs // 2] + (Y[: pairs // 2] / radius) * 1e-3
    gaps = np.abs(fn.values(X) - fn.values(Y))
    dist = dp_distance(X, Y, p)
    excess = gaps - fn.lipschitz_constant * dist
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(dist > 0.0, gaps / dist, 0.0)
    return {
        "worst_ratio": float(ratios.max()),
        "worst_excess": float(excess.max()),
        "passed": bool(excess.max() <= CERTIFY_TOL),
        "pairs": pairs,
        "p": p,
    }


def gradient_consistency(fn, seed, points=1_000, h=FD_STEP, band=KINK_BAND, radius=10.0):
    """Central differences against the declared gradient, away from kinks."""
    X = _probe_points(fn, seed, points, radius, stream=2)
    keep = fn.kink_distance(X) >= band
    X = X[keep]
    grads = fn.gradients(X)
    worst = 0.0
    for i in range(fn.arity):
        step = np.zeros(fn.arity)
        step[i] = h
        fd = (fn.values(X + step) - fn.values(X - step)) / (2.0 * h)
        err = np.abs(fd - grads[:, i]) / np.maximum(np.abs(grads[:, i]), 1.0)
        if err.size:
            worst = max(worst, float(err.max()))
    return {"worst_error": worst, "checked": int(keep.sum()), "excluded": int((~keep).sum()),
            "passed": worst <= FD_REL_TOL}


def dual_norm_check(fn, seed, points=1_000, p=None, radius=10.0):
    """Worst sum_i |d_i f|^(p/(p-1)) over seeded points; at most 1 for d_p-1-Lipschitz f."""
    p = fn.metric if p is None else p
    q = helpers.dual_exponent(p)
    X = _probe_points(fn, seed, points, radius, stream=3)
    totals = np.power(np.abs(fn.gradients(X)), q).sum(axis=1)
    worst = float(totals.max())
    return {"worst": worst, "passed": worst <= 1.0 + CERTIFY_TOL, "p": p}


FUNCTION_BUILDERS = {
    "max": MaxFn,
    "activation": ActivationFn,
    "scaled_sum": ScaledSumFn,
    "distance_to_set": DistanceToSetFn,
    "l2_norm": L2NormFn,
    "linear": LinearFn,
    "identity": lambda: LinearFn([1.0]),
    "constant": ConstantFn,
}


def build_function(name, **params):
    builder = FUNCTION_BUILDERS.get(name)
    if builder is None:
        raise DomainError(f"unknown function '{name}' (known: {', '.join(sorted(FUNCTION_BUILDERS))})")
    try:
        return builder(**params)
    except TypeError as e:
        raise DomainError(f"bad parameters for function '{name}': {e}") from e
