"""
Dense symmetric eigenvalues by cyclic Jacobi rotations.

Rotations are applied to a whole stack of matrices at once; a matrix that has
converged receives identity rotations from then on, so its eigenvalues do not
depend on which other matrices share its stack.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import helpers
from .errors import DomainError, SolverError
from .measures import ParetoMeasure
from .reports import bound_report
from .streams import UniformStream

OFF_DIAGONAL_TOL = 1e-12
INVARIANT_TOL = 1e-10
MAX_SWEEPS = 100
MONOTONE_SLACK = 1e-14
MAX_ORDER = 512


@dataclass(frozen=True)
class SymMatrix:
    """Order-n symmetric matrix stored as its upper triangle, row by row."""
    order: int
    entries: tuple

    def __post_init__(self):
        n = int(self.order)
        if n < 1 or n > MAX_ORDER:
            raise DomainError(f"a symmetric matrix requires 1 <= order <= {MAX_ORDER} (got {self.order})")
        if len(self.entries) != n * (n + 1) // 2:
            raise DomainError(f"order {n} needs {n * (n + 1) // 2} packed entries (got {len(self.entries)})")
        helpers.require_finite("matrix entries", self.entries, "the eigensolver")

    @classmethod
    def from_packed(cls, order, values):
        return cls(order=int(order), entries=tuple(float(v) for v in values))

    @classmethod
    def from_dense(cls, matrix):
        """Reads the upper triangle; the lower one is ignored."""
        arr = np.asarray(matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DomainError(f"expected a square matrix (got shape {arr.shape})")
        rows, cols = np.triu_indices(arr.shape[0])
        return cls.from_packed(arr.shape[0], arr[rows, cols])

    def dense(self):
        n = self.order
        out = np.zeros((n, n))
        rows, cols = np.triu_indices(n)
        out[rows, cols] = self.entries
        out[cols, rows] = self.entries
        return out

    def trace(self):
        return float(np.trace(self.dense()))

    def frobenius_norm(self):
        """Over the full matrix: off-diagonal entries count twice."""
        return float(np.linalg.norm(self.dense()))


@dataclass
class JacobiResult:
    eigenvalues: np.ndarray      # (T, n), each row descending
    sweeps: np.ndarray           # per matrix
    off_history: list            # per sweep: (T,) off-diagonal Frobenius norms


def _off_norm(stack):
    diag = np.einsum("tii->ti", stack)
    total = np.einsum("tij,tij->t", stack, stack)
    return np.sqrt(np.maximum(total - np.einsum("ti,ti->t", diag, diag), 0.0))


def _rotate(stack, p, q, active):
    """One Jacobi rotation zeroing (p, q) in every active matrix of the stack."""
    apq = stack[:, p, q]
    rotate = active & (apq != 0.0)
    if not rotate.any():
        return
    app, aqq = stack[:, p, p], stack[:, q, q]
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(rotate, (aqq - app) / (2.0 * np.where(rotate, apq, 1.0)), 0.0)
    sign = np.where(tau >= 0.0, 1.0, -1.0)
    t = sign / (np.abs(tau) + np.hypot(1.0, tau))
    c = np.where(rotate, 1.0 / np.hypot(1.0, t), 1.0)
    s = np.where(rotate, t * c, 0.0)

    col_p, col_q = stack[:, :, p].copy(), stack[:, :, q].copy()
    stack[:, :, p] = c[:, None] * col_p - s[:, None] * col_q
    stack[:, :, q] = s[:, None] * col_p + c[:, None] * col_q
    row_p, row_q = stack[:, p, :].copy(), stack[:, q, :].copy()
    stack[:, p, :] = c[:, None] * row_p - s[:, None] * row_q
    stack[:, q, :] = s[:, None] * row_p + c[:, None] * row_q
    stack[rotate, p, q] = 0.0
    stack[rotate, q, p] = 0.0


def _descending(values):
    """Strictly descending; equal values keep their diagonal order."""
    order = np.argsort(-values, axis=1, kind="stable")
    return np.take_along_axis(values, order, axis=1)


def jacobi(stack, tol=OFF_DIAGONAL_TOL, max_sweeps=MAX_SWEEPS):
    """Cyclic Jacobi on a (T, n, n) stack of symmetric matrices."""
    stack = np.array(stack, dtype=float)
    if stack.ndim == 2:
        stack = stack[None]
    count, n = stack.shape[0], stack.shape[1]
    helpers.require_finite("matrix entries", stack, "the eigensolver")
    targets = tol * np.sqrt(np.einsum("tij,tij->t", stack, stack))
    off = _off_norm(stack)
    history = [off.copy()]
    sweeps = np.zeros(count, dtype=int)
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]

    for _ in range(max_sweeps):
        active = off > targets
        if not active.any():
            break
        for p, q in pairs:
            _rotate(stack, p, q, active)
        sweeps += active
        new_off = _off_norm(stack)
        bound = off + MONOTONE_SLACK * np.sqrt(np.einsum("tij,tij->t", stack, stack))
        if np.any(new_off[active] > bound[active]):
            raise SolverError("Jacobi sweep increased the off-diagonal norm")
        off = np.where(active, new_off, off)
        history.append(off.copy())
    else:
        if np.any(off > targets):
            raise SolverError(f"Jacobi did not converge within {max_sweeps} sweeps")

    return JacobiResult(eigenvalues=_descending(np.einsum("tii->ti", stack).copy()),
                        sweeps=sweeps, off_history=history)


def eigenvalues(matrix):
    """All eigenvalues of a SymMatrix, descending."""
    return jacobi(matrix.dense()).eigenvalues[0]


def eigenvalues_batch(matrices):
    """Eigenvalues of many matrices of one order; a (T, n) array, rows descending."""
    start_time = time.time()
    if isinstance(matrices, np.ndarray):
        stack = matrices
    else:
        orders = {m.order for m in matrices}
        if len(orders) != 1:
            raise DomainError(f"a batch needs matrices of one order (got orders {sorted(orders)})")
        stack = np.stack([m.dense() for m in matrices])
    result = jacobi(stack)
    print(f"[JACOBI] {result.eigenvalues.shape[0]} matrices of order {result.eigenvalues.shape[1]}: "
          f"max {int(result.sweeps.max(initial=0))} sweeps (took {helpers.elapsed_ms(start_time):.2f}ms)")
    return result.eigenvalues


def spectral_invariants(matrix, values=None):
    """Trace and Frobenius identities as an oracle for a computed spectrum."""
    values = eigenvalues(matrix) if values is None else np.asarray(values, dtype=float)
    frob = matrix.frobenius_norm()
    tolerance = INVARIANT_TOL * matrix.order * max(frob, 1.0)
    trace_error = abs(float(values.sum()) - matrix.trace())
    frobenius_error = abs(float((values ** 2).sum()) - frob ** 2)
    return {
        "trace_error": trace_error,
        "frobenius_error": frobenius_error,
        "tolerance": tolerance,
        "ok": trace_error <= tolerance and frobenius_error <= tolerance * max(frob, 1.0),
    }


def hoffman_wielandt_check(a, b):
    """sum_i |lambda_i(A) - lambda_i(B)|^2 <= ||A - B||_F^2, spectra sorted alike."""
    if a.order != b.order:
        raise DomainError(f"the Hoffman-Wielandt check needs equal orders (got {a.order} and {b.order})")
    la, lb = eigenvalues(a), eigenvalues(b)
    lhs = float(((la - lb) ** 2).sum())
    rhs = float(((a.dense() - b.dense()) ** 2).sum())
    scale = a.frobenius_norm() ** 2 + b.frobenius_norm() ** 2
    return bound_report("hoffman_wielandt", "sum |l_i - l'_i|^2 <= ||A - B||_F^2", lhs, rhs,
                        tolerance=INVARIANT_TOL * a.order * max(scale, 1.0),
                        config={"order": a.order})


def random_pareto_matrix(lam, n, seed, index=0):
    """Symmetric matrix with i.i.d. Pareto(lambda) upper-triangle entries; trial `index` owns stream (seed, index)."""
    measure = ParetoMeasure(lam)
    u = UniformStream(seed, index).next(n * (n + 1) // 2)
    return SymMatrix.from_packed(n, measure.quantile(u))


def random_symmetric_matrix(n, seed, index=0):
    """Entries uniform on (-1, 1); used for solver property checks."""
    u = UniformStream(seed, index).next(n * (n + 1) // 2)
    return SymMatrix.from_packed(n, 2.0 * u - 1.0)


def hoffman_wielandt_battery(n, pairs, seed):
    """Hoffman-Wielandt on `pairs` seeded random pairs; pair k reads streams 2k and 2k + 1."""
    return [hoffman_wielandt_check(random_symmetric_matrix(n, seed, 2 * k),
                                   random_symmetric_matrix(n, seed, 2 * k + 1))
            for k in range(pairs)]
