"""Dense linear-algebra helpers: symmetric eigensolvers, ridge solves, distances."""

from typing import NamedTuple

import numpy as np
import scipy.linalg

from cdm import kernels
from cdm.errors import DimensionMismatchError, SingularMatrixError


class EigenPairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def fix_signs(vectors, tol=1e-12):
    """Flip each column so its first non-negligible entry is positive."""
    vectors = np.array(vectors, dtype=np.float64, copy=True)
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        big = np.flatnonzero(np.abs(col) > tol * max(np.abs(col).max(), 1e-300))
        if big.size and col[big[0]] < 0:
            vectors[:, j] = -col
    return vectors


def _descending(values, vectors):
    # stable so equal eigenvalues keep the solver's (axis) order
    order = np.argsort(-values, kind="stable")
    return EigenPairs(values[order], fix_signs(vectors[:, order]))


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix has non-finite entries")


def sym_eig(A) -> EigenPairs:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {A.shape}")
    _check_finite(A)
    values, vectors = np.linalg.eigh(0.5 * (A + A.T))
    return _descending(values, vectors)


def gen_eig_sym(A, B) -> EigenPairs:
    """Solve ``A v = lambda B v`` for symmetric A and positive-definite B.

    Eigenvectors are B-orthonormal (``V.T @ B @ V = I``).
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"shapes {A.shape} and {B.shape} are not matching squares")
    _check_finite(A, B)
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    try:
        values, vectors = scipy.linalg.eigh(A, B)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"metric matrix is not positive-definite: {exc}") from None
    return _descending(values, vectors)


def ridge_solve(inputs, targets, eta: float) -> np.ndarray:
    r"""Multi-target ridge regression without intercept.

    Parameters
    ----------
    inputs : array, shape (n, N)
        One input vector per column.
    targets : array, shape (d, N)
        One target vector per column.
    eta : float
        Weight of the squared Frobenius penalty.

    Returns
    -------
    M : array, shape (d, n)
        ``argmin_M sum_i ||M y_i - g_i||^2 + eta ||M||_F^2``, i.e.
        ``G Y^T (Y Y^T + eta I)^{-1}``.
    """
    Y = np.asarray(inputs, dtype=np.float64)
    G = np.asarray(targets, dtype=np.float64)
    if Y.ndim != 2 or G.ndim != 2 or Y.shape[1] != G.shape[1]:
        raise DimensionMismatchError(
            f"inputs {Y.shape} and targets {G.shape} must have the same number of columns"
        )
    n, N = Y.shape
    if N < 1:
        raise ValueError("need at least one training column")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    _check_finite(Y, G)
    if eta == 0.0:
        gram = Y @ Y.T
        if np.linalg.matrix_rank(gram) < n:
            raise SingularMatrixError("Y Y^T is singular; use eta > 0")
        return scipy.linalg.solve(gram, Y @ G.T, assume_a="pos").T
    if N < n:
        # dual form: G (Y^T Y + eta I)^{-1} Y^T needs only an N x N solve
        gram = Y.T @ Y + eta * np.eye(N)
        return (Y @ scipy.linalg.solve(gram, G.T, assume_a="pos")).T
    gram = Y @ Y.T + eta * np.eye(n)
    return scipy.linalg.solve(gram, Y @ G.T, assume_a="pos").T


def pairwise_dist(A, B) -> np.ndarray:
    """Euclidean distances between the rows of A (p x d) and B (q x d)."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatchError(f"column counts differ: {A.shape[1]} vs {B.shape[1]}")
    return kernels.pairwise_dist(A, B)
