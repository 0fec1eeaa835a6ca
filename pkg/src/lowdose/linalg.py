"""Dense vectors, matrix-free symmetric operators, and power iteration.

Vectors are plain 1-D float64 numpy arrays.  Operators expose only a
dimension and an apply rule, so the count-weighted Gram form used by the
spectral estimator is never materialized as an n-by-n array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .streams import RngStream

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000

# fresh random restarts before declaring the operator numerically zero
_MAX_RESTARTS = 3


class NoDominantEigenpair(RuntimeError):
    """Raised when every power-iteration start is annihilated (zero operator)."""


def _check_vector(v, n=None) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-D vector")
    if n is not None and v.size != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {v.size}")
    return v


def dot(u, v) -> float:
    u = _check_vector(u)
    v = _check_vector(v, u.size)
    return float(u @ v)


def norm2(v) -> float:
    return float(np.linalg.norm(_check_vector(v)))


def axpy(a: float, x, y) -> np.ndarray:
    """a*x + y."""
    x = _check_vector(x)
    y = _check_vector(y, x.size)
    return a * x + y


def sign_normalize(v: np.ndarray) -> np.ndarray:
    """Flip sign so the first nonzero component is positive (copy)."""
    v = np.asarray(v, dtype=float)
    for entry in v:
        if entry != 0.0:
            return -v if entry < 0.0 else v.copy()
    return v.copy()


class SymmetricOperator:
    """Real symmetric linear map given by an apply rule."""

    dim: int

    def apply(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _checked(self, v) -> np.ndarray:
        return _check_vector(v, self.dim)


class DenseSymmetric(SymmetricOperator):
    """Explicit n-by-n symmetric array (small n, tests and oracles)."""

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("expected a square matrix")
        skew = np.max(np.abs(matrix - matrix.T)) if matrix.size else 0.0
        if skew > 1e-12 * max(np.max(np.abs(matrix)), 1.0):
            raise ValueError("matrix is not symmetric")
        self.matrix = matrix
        self.dim = matrix.shape[0]

    def apply(self, v):
        return self.matrix @ self._checked(v)


class WeightedGram(SymmetricOperator):
    """v -> scale * A^T diag(w) A v, computed with two matvecs, O(mn) per apply."""

    def __init__(self, ensemble_matrix, weights, scale=1.0):
        a = np.asarray(ensemble_matrix, dtype=float)
        w = np.asarray(weights, dtype=float)
        if a.ndim != 2:
            raise ValueError("ensemble matrix must be 2-D")
        if w.shape != (a.shape[0],):
            raise ValueError("one weight per ensemble row required")
        self.ensemble_matrix = a
        self.weights = w
        self.scale = float(scale)
        self.dim = a.shape[1]

    def apply(self, v):
        v = self._checked(v)
        projections = self.ensemble_matrix @ v
        return self.scale * (self.ensemble_matrix.T @ (self.weights * projections))


class RankOnePlusIdentity(SymmetricOperator):
    """v -> outer_coef * x <x, v> + identity_coef * v (matrix-free rank-one + identity)."""

    def __init__(self, direction, outer_coef: float, identity_coef: float):
        self.direction = _check_vector(direction)
        self.outer_coef = float(outer_coef)
        self.identity_coef = float(identity_coef)
        self.dim = self.direction.size

    def apply(self, v):
        v = self._checked(v)
        return self.outer_coef * self.direction * (self.direction @ v) + self.identity_coef * v


class OperatorDifference(SymmetricOperator):
    """left - right, used for deviation-from-expectation measurements."""

    def __init__(self, left: SymmetricOperator, right: SymmetricOperator):
        if left.dim != right.dim:
            raise ValueError("dimension mismatch between operators")
        self.left = left
        self.right = right
        self.dim = left.dim

    def apply(self, v):
        return self.left.apply(v) - self.right.apply(v)


class _Squared(SymmetricOperator):
    def __init__(self, op: SymmetricOperator):
        self.op = op
        self.dim = op.dim

    def apply(self, v):
        return self.op.apply(self.op.apply(v))


@dataclass
class EigenResult:
    eigenvalue: float
    eigenvector: np.ndarray  # unit norm, first nonzero component positive
    iterations: int
    residual: float
    converged: bool


def top_eigenpair(
    op: SymmetricOperator,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    rng: RngStream | None = None,
) -> EigenResult:
    """Power iteration for the dominant eigenpair of a symmetric operator.

    Requires the largest eigenvalue to dominate in magnitude (true for the
    positive-semidefinite count-weighted Gram matrices this package builds).
    Starts from a random unit vector drawn from `rng`; convergence means
    ||Mv - lambda v|| <= tol * |lambda|.  Hitting max_iter is reported via
    `converged=False`, not an error.  A numerically zero operator raises
    NoDominantEigenpair.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if rng is None:
        raise ValueError("an RngStream is required for the random start")

    for _ in range(_MAX_RESTARTS):
        v = rng.standard_gaussian(op.dim)
        nv = np.linalg.norm(v)
        if nv == 0.0:  # astronomically unlikely, redraw
            continue
        v /= nv

        iterations = 0
        while iterations < max_iter:
            w = op.apply(v)
            iterations += 1
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break  # v in the kernel: restart from a fresh direction
            eigenvalue = float(v @ w)
            residual = float(np.linalg.norm(w - eigenvalue * v))
            if residual <= tol * abs(eigenvalue) or iterations == max_iter:
                return EigenResult(
                    eigenvalue=eigenvalue,
                    eigenvector=sign_normalize(v),
                    iterations=iterations,
                    residual=residual,
                    converged=residual <= tol * abs(eigenvalue),
                )
            v = w / nw
    raise NoDominantEigenpair("all power-iteration starts were annihilated (zero operator?)")


def spectral_norm(
    op: SymmetricOperator,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    rng: RngStream | None = None,
) -> float:
    """max |eigenvalue| of a symmetric (possibly indefinite) operator.

    Power iteration on v -> M(Mv); returns sqrt of the dominant eigenvalue
    of M^2.  A zero operator has norm 0.
    """
    try:
        result = top_eigenpair(_Squared(op), tol=tol, max_iter=max_iter, rng=rng)
    except NoDominantEigenpair:
        return 0.0
    return float(np.sqrt(max(result.eigenvalue, 0.0)))
