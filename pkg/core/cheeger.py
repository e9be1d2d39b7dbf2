"""
Estimators of the alpha-Cheeger constant

    I(nu, alpha) = sup_A min{nu(A), 1 - nu(A)} / nu(A+)^alpha

of a one-dimensional law: a scan over half-lines, an exhaustive search over
unions of equal-mass cells, and closed forms where they are known.
"""

import math
import multiprocessing as mp
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from . import helpers
from .constants import pareto_cheeger_bound
from .errors import DomainError
from .measures import ExtremalMeasure, LaplaceMeasure, ParetoMeasure

ANALYTIC = "analytic"
HALF_LINE = "half_line"
GRID_BRUTEFORCE = "grid_bruteforce"

MASK_CHUNK = 1 << 16
ALPHA_MATCH_TOL = 1e-12


@dataclass
class CheegerEstimate:
    alpha: float
    value: float
    method: str
    witness: dict = field(default_factory=dict)
    grid_resolution: Optional[int] = None
    exact: bool = False

    def as_dict(self):
        return {
            "alpha": self.alpha,
            "value": self.value if math.isfinite(self.value) else "inf",
            "method": self.method,
            "witness": self.witness,
            "grid_resolution": self.grid_resolution,
            "exact": self.exact,
        }


def _check_alpha(alpha, context):
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"{context} requires 0 < alpha <= 1 (got alpha={alpha!r})")


def half_line_functional(measure, alpha, p):
    """min{p, 1-p} / density(Q(p))^alpha; +inf where the density vanishes."""
    p_arr = np.asarray(p, dtype=float)
    dens = np.asarray(measure.density(measure.quantile(p_arr)), dtype=float)
    with np.errstate(divide="ignore"):
        values = np.where(dens > 0.0, np.minimum(p_arr, 1.0 - p_arr) / np.power(dens, alpha), math.inf)
    if np.ndim(p) == 0:
        return float(values)
    return values


def alpha_continuity_gap(measure, p, alpha, h=1e-6):
    """|F(alpha + h) - F(alpha - h)| for the half-line functional F at fixed p."""
    upper = half_line_functional(measure, min(alpha + h, 1.0), p)
    lower = half_line_functional(measure, alpha - h, p)
    return abs(upper - lower)


def _half_line_witness(measure, p):
    side = "lower" if p < 0.5 else "upper"
    return {"p": float(p), "threshold": float(measure.quantile(p)), "side": side}


def half_line_scan(measure, alpha, grid=None):
    """
    Supremum of the half-line functional over a p-grid, refined by bounded
    Brent search in the neighbourhood of the best grid point. A lower bound
    for I(nu, alpha).
    """
    start_time = time.time()
    grid = helpers.HALF_LINE_GRID if grid is None else int(grid)
    _check_alpha(alpha, "the half-line scan")
    if grid < 10:
        raise DomainError(f"the half-line scan requires grid >= 10 (got grid={grid})")

    p_grid = np.arange(1, grid) / grid
    values = half_line_functional(measure, alpha, p_grid)
    infinite = np.flatnonzero(~np.isfinite(values))
    if infinite.size:
        p_bad = p_grid[infinite[0]]
        print(f"[CHEEGER] Density vanishes at p={p_bad:.6g}; half-line value is unbounded")
        return CheegerEstimate(alpha=alpha, value=math.inf, method=HALF_LINE,
                               witness=_half_line_witness(measure, p_bad), grid_resolution=grid)

    k = int(np.argmax(values))
    best_p, best_value = float(p_grid[k]), float(values[k])
    lo = p_grid[k - 1] if k > 0 else p_grid[0] / 2.0
    hi = p_grid[k + 1] if k + 1 < len(p_grid) else (1.0 + p_grid[-1]) / 2.0
    refined = optimize.minimize_scalar(
        lambda p: -half_line_functional(measure, alpha, p),
        bounds=(lo, hi), method="bounded", options={"xatol": helpers.HALF_LINE_XATOL},
    )
    if refined.success and -refined.fun > best_value:
        best_p, best_value = float(refined.x), float(-refined.fun)

    print(f"[CHEEGER] Half-line scan: I ~ {best_value:.9g} at p={best_p:.6g} "
          f"(grid={grid}, took {helpers.elapsed_ms(start_time):.2f}ms)")
    return CheegerEstimate(alpha=alpha, value=best_value, method=HALF_LINE,
                           witness=_half_line_witness(measure, best_p), grid_resolution=grid)


def _scan_masks(start, stop, cells, densities, alpha):
    """Best (value, mask) over masks in [start, stop); ties go to the smallest mask."""
    masks = np.arange(start, stop, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(cells, dtype=np.int64)) & 1).astype(np.int8)
    mass = bits.sum(axis=1) / cells
    flips = bits[:, 1:] != bits[:, :-1]
    boundary = flips.astype(float) @ densities
    with np.errstate(divide="ignore"):
        values = np.where(boundary > 0.0,
                          np.minimum(mass, 1.0 - mass) / np.power(boundary, alpha), math.inf)
    k = int(np.argmax(values))
    return float(values[k]), int(masks[k])


def _mask_intervals(mask, cells):
    """Maximal runs of set bits as (first_cell, last_cell + 1) pairs."""
    runs, start = [], None
    for i in range(cells + 1):
        on = i < cells and (mask >> i) & 1
        if on and start is None:
            start = i
        elif not on and start is not None:
            runs.append((start, i))
            start = None
    return runs


def _finite_or_text(x):
    return float(x) if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def grid_bruteforce(measure, alpha, cells=16, workers=1):
    """
    Exhaustive maximum over unions of `cells` equal-mass quantile cells.

    nu(A) is a multiple of 1/cells; nu(A+) is the sum of the density over the
    interior cut points where membership changes (support edges add nothing).
    """
    start_time = time.time()
    _check_alpha(alpha, "the grid search")
    cells = int(cells)
    if cells > helpers.MAX_BRUTEFORCE_CELLS:
        raise DomainError(f"the grid search requires cells <= {helpers.MAX_BRUTEFORCE_CELLS} (got cells={cells})")
    if cells < 2:
        raise DomainError(f"the grid search requires cells >= 2 (got cells={cells})")

    cut_p = np.arange(1, cells) / cells
    densities = np.asarray(measure.density(measure.quantile(cut_p)), dtype=float)
    total = (1 << cells) - 1  # masks 1 .. 2^cells - 2
    bounds = [(s, min(s + MASK_CHUNK, total)) for s in range(1, total, MASK_CHUNK)]

    if workers and workers > 1 and len(bounds) > 1:
        with mp.Pool(processes=workers) as pool:
            pending = [pool.apply_async(_scan_masks, (s, e, cells, densities, alpha)) for s, e in bounds]
            results = [r.get() for r in pending]
    else:
        results = [_scan_masks(s, e, cells, densities, alpha) for s, e in bounds]

    best_value, best_mask = -math.inf, None
    for value, mask in results:
        if value > best_value:
            best_value, best_mask = value, mask

    runs = _mask_intervals(best_mask, cells)
    edges = np.asarray(measure.quantile(np.arange(cells + 1) / cells), dtype=float)
    edges[0], edges[-1] = measure.support
    witness = {
        "mask": best_mask,
        "p_intervals": [[a / cells, b / cells] for a, b in runs],
        "intervals": [[_finite_or_text(edges[a]), _finite_or_text(edges[b])] for a, b in runs],
    }
    print(f"[CHEEGER] Grid search over {total - 1} unions of {cells} cells: I >= {best_value:.9g} "
          f"(took {helpers.elapsed_ms(start_time):.2f}ms)")
    return CheegerEstimate(alpha=alpha, value=best_value, method=GRID_BRUTEFORCE,
                           witness=witness, grid_resolution=cells)


def discretization_slack(cells, max_value):
    """Allowed shortfall of the grid search below the half-line scan."""
    return 2.0 / cells * max_value


def analytic_cheeger(measure, alpha):
    """Closed-form values where the half-line functional is constant and extremal."""
    if isinstance(measure, ParetoMeasure) and abs(alpha - (measure.lam - 1.0) / measure.lam) <= ALPHA_MATCH_TOL:
        value = pareto_cheeger_bound(measure.lam).value
        return CheegerEstimate(alpha=alpha, value=value, method=ANALYTIC, exact=True,
                               witness={"side": "upper", "p": "any p >= 1/2"})
    if isinstance(measure, LaplaceMeasure) and alpha == 1.0:
        return CheegerEstimate(alpha=alpha, value=1.0 / measure.t, method=ANALYTIC, exact=True,
                               witness={"side": "either", "p": "any p"})
    if isinstance(measure, ExtremalMeasure) and abs(alpha - measure.alpha) <= ALPHA_MATCH_TOL:
        # Half-line functional is identically I; reported as the half-line value.
        return CheegerEstimate(alpha=alpha, value=measure.cheeger, method=ANALYTIC, exact=False,
                               witness={"side": "either", "p": "any p"})
    raise DomainError(f"no closed-form alpha-Cheeger value for {measure.describe()} at alpha={alpha!r}")
