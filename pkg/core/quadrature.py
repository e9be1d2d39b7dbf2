"""
Adaptive quadrature for heavy-tailed integrands.

Unbounded pieces are mapped onto (0, 1] with x = c -/+ 1 + 1/u before calling
scipy's QUADPACK wrapper, so polynomial tails are integrated without any
truncation point.
"""

import math
import warnings

from scipy import integrate

from . import helpers
from .errors import DomainError


def _tail_right(fn, anchor):
    # x = anchor - 1 + 1/u maps (0, 1] onto [anchor, inf)
    def mapped(u):
        if u <= 0.0:
            return 0.0
        x = anchor - 1.0 + 1.0 / u
        value = fn(x)
        if value == 0.0:
            return 0.0
        return value / (u * u)
    return mapped


def _tail_left(fn, anchor):
    # x = anchor + 1 - 1/u maps (0, 1] onto (-inf, anchor]
    def mapped(u):
        if u <= 0.0:
            return 0.0
        x = anchor + 1.0 - 1.0 / u
        value = fn(x)
        if value == 0.0:
            return 0.0
        return value / (u * u)
    return mapped


def _quad(fn, a, b, points=None):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, abserr = integrate.quad(
            fn, a, b,
            epsabs=helpers.QUAD_ABS_TOL,
            epsrel=helpers.QUAD_REL_TOL,
            limit=helpers.QUAD_LIMIT,
            points=points,
        )
    if not math.isfinite(value):
        raise DomainError("integral is not finite")
    if caught and abserr > max(1e-6, 1e-6 * abs(value)):
        raise DomainError(f"integral did not converge (estimate {value:.6g}, error {abserr:.3g})")
    return value, abserr


def _points_in(points, lo, hi, to_u=None):
    """Break points strictly inside (lo, hi), mapped to u for a tail piece."""
    if not points:
        return None
    inside = [float(x) for x in points if lo < x < hi]
    if to_u is not None:
        inside = [to_u(x) for x in inside]
    return sorted(inside) or None


def integrate_with_error(fn, a, b, anchor=None, points=None):
    """
    Integrates fn over [a, b] where either end may be infinite.

    anchor is the split point between the plain finite piece and a mapped tail
    piece; it defaults to the finite end (or 0 for the whole line). Break
    points on a tail piece are carried through the 1/u map.
    Returns (value, abserr).
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, err = integrate_with_error(fn, b, a, anchor=anchor, points=points)
        return -value, err

    a_inf = math.isinf(a)
    b_inf = math.isinf(b)
    if not a_inf and not b_inf:
        return _quad(fn, a, b, points=_points_in(points, a, b))

    if anchor is None:
        if not a_inf:
            anchor = a
        elif not b_inf:
            anchor = b
        else:
            anchor = 0.0

    total, error = 0.0, 0.0
    if a_inf:
        to_u = lambda x: 1.0 / (anchor + 1.0 - x)
        value, err = _quad(_tail_left(fn, anchor), 0.0, 1.0, points=_points_in(points, -math.inf, anchor, to_u))
        total, error = total + value, error + err
    elif a < anchor:
        value, err = _quad(fn, a, anchor, points=_points_in(points, a, anchor))
        total, error = total + value, error + err
    if b_inf:
        to_u = lambda x: 1.0 / (x - anchor + 1.0)
        value, err = _quad(_tail_right(fn, anchor), 0.0, 1.0, points=_points_in(points, anchor, math.inf, to_u))
        total, error = total + value, error + err
    elif anchor < b:
        value, err = _quad(fn, anchor, b, points=_points_in(points, anchor, b))
        total, error = total + value, error + err
    return total, error


def integrate_fn(fn, a, b, anchor=None, points=None):
    """Value-only form of integrate_with_error."""
    return integrate_with_error(fn, a, b, anchor=anchor, points=points)[0]
