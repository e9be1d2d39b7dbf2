# --- File: helpers.py ---
# --- Tolerances shared by the numerical modules (also patchable in tests) ---
QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-10
QUAD_LIMIT = 400
ROOT_XTOL = 1e-13
NORMALIZATION_TOL = 1e-6
MAX_BRUTEFORCE_CELLS = 24
HALF_LINE_GRID = 4096
HALF_LINE_XATOL = 1e-10

import math
import time

import numpy as np

from .errors import DomainError


# --- Domain checks ---

def require_open(name, value, lo, hi, context, lo_text=None):
    """Raises DomainError unless lo < value < hi (strict on both sides, no slack)."""
    if not (lo < value < hi):
        raise DomainError(f"{context} requires {lo_text or _fmt(lo)} < {name} < {_fmt(hi)} (got {name}={value!r})")
    return float(value)


def require_greater(name, value, lo, context):
    """Raises DomainError unless value > lo."""
    if not value > lo:
        raise DomainError(f"{context} requires {name} > {_fmt(lo)} (got {name}={value!r})")
    return float(value)


def require_at_least(name, value, lo, context):
    if not value >= lo:
        raise DomainError(f"{context} requires {name} >= {_fmt(lo)} (got {name}={value!r})")
    return value


def require_half_open(name, value, lo, hi, context):
    """Raises DomainError unless lo <= value < hi."""
    if not (lo <= value < hi):
        raise DomainError(f"{context} requires {_fmt(lo)} <= {name} < {_fmt(hi)} (got {name}={value!r})")
    return float(value)


def require_finite(name, values, context):
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{context} requires finite {name}")
    return arr


def _fmt(x):
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return f"{x:g}"


def beta_limit(alpha):
    """Upper end alpha/(1-alpha) of the admissible beta/gamma range."""
    return alpha / (1.0 - alpha)


def dual_exponent(p):
    """Conjugate exponent p/(p-1); p = inf maps to 1."""
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


def elapsed_ms(start_time):
    """Milliseconds since start_time (a time.time() value)."""
    return (time.time() - start_time) * 1000
