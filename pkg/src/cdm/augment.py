"""Two-block feature augmentation: latent features next to the raw SM features.

LTM vectors get ``[H P x, 0_n]`` and SM vectors ``[H Q y, y]`` so both live in
``d + n`` dimensions. Each function accepts one vector or a matrix of rows.
"""

import numpy as np

from cdm.discriminant import LinearMap
from cdm.errors import DimensionMismatchError


def _check(H: LinearMap, inner: LinearMap):
    if H.source_dim != inner.target_dim:
        raise DimensionMismatchError(
            f"H expects {H.source_dim}-dimensional input, inner map gives {inner.target_dim}"
        )


def _latent(H, inner, V):
    # same evaluation order as chaining apply_map(inner) then apply_map(H)
    return (V @ inner.matrix.T) @ H.matrix.T


def _rows(v, dim):
    v = np.asarray(v, dtype=np.float64)
    single = v.ndim == 1
    V = np.atleast_2d(v)
    if V.shape[1] != dim:
        raise DimensionMismatchError(f"input has dimension {V.shape[1]}, expected {dim}")
    return V, single


def augment_ltm(H: LinearMap, P: LinearMap, x, n: int):
    _check(H, P)
    X, single = _rows(x, P.source_dim)
    out = np.hstack([_latent(H, P, X), np.zeros((X.shape[0], n))])
    return out[0] if single else out


def augment_sm(H: LinearMap, Q: LinearMap, y):
    _check(H, Q)
    Y, single = _rows(y, Q.source_dim)
    out = np.hstack([_latent(H, Q, Y), Y])
    return out[0] if single else out
