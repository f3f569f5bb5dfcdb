"""Projections into the latent space: three ways to learn P, and the final map H."""

import warnings
from dataclasses import dataclass

import numpy as np

from cdm.dataset import LabeledDataset
from cdm.errors import DegenerateScatterError, DimensionMismatchError, InsufficientDataError, SingularMatrixError
from cdm.median import LatentEmbedding
from cdm.numerics import gen_eig_sym, ridge_solve, sym_eig

KINDS = ("lda", "graph_embedding", "fixed_medians", "ridge_to_medians", "identity")

# shrinkage weight for the within-class scatter: S_w + eps * tr(S_w) / m * I
SHRINKAGE = 1e-3


@dataclass(frozen=True)
class LinearMap:
    """A ``target_dim x source_dim`` matrix tagged with how it was learned."""

    matrix: np.ndarray
    kind: str

    def __post_init__(self):
        M = np.array(self.matrix, dtype=np.float64)
        if M.ndim != 2 or 0 in M.shape:
            raise ValueError(f"map matrix must be 2-D and non-empty, got {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("map matrix has non-finite entries")
        if self.kind not in KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def source_dim(self):
        return self.matrix.shape[1]

    @property
    def target_dim(self):
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, d):
        return cls(np.eye(d), "identity")

    def __matmul__(self, other):
        if not isinstance(other, LinearMap):
            return NotImplemented
        if self.source_dim != other.target_dim:
            raise DimensionMismatchError(f"cannot compose {self.matrix.shape} with {other.matrix.shape}")
        return LinearMap(self.matrix @ other.matrix, self.kind)


def scatter_matrices(X, labels, n_classes=None):
    """Between- and within-class scatter, both normalized by the instance count."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    N, m = X.shape
    mu = X.mean(axis=0)
    Sb = np.zeros((m, m))
    Sw = np.zeros((m, m))
    for c in range(n_classes):
        Xc = X[labels == c]
        if Xc.shape[0] == 0:
            continue
        mc = Xc.mean(axis=0)
        diff = mc - mu
        Sb += Xc.shape[0] * np.outer(diff, diff)
        centered = Xc - mc
        Sw += centered.T @ centered
    return Sb / N, Sw / N


def lda_objective(points, labels, n_classes=None):
    """``tr(S_w^+ S_b)`` of the given points, the quantity LDA maximizes.

    Invariant to any invertible linear transform of the points.
    """
    Sb, Sw = scatter_matrices(points, labels, n_classes)
    return float(np.trace(np.linalg.pinv(Sw) @ Sb))


def lda_directions(X, labels, n_classes, d, shrinkage=SHRINKAGE):
    """Top-``d`` generalized eigenvectors of ``(S_b, S_w + ridge)`` as rows."""
    Sb, Sw = scatter_matrices(X, labels, n_classes)
    m = Sw.shape[0]
    tr = np.trace(Sw)
    if not tr > 0.0:
        raise DegenerateScatterError("within-class scatter is zero; classes are point masses")
    Sw_reg = Sw + shrinkage * tr / m * np.eye(m)
    pairs = gen_eig_sym(Sb, Sw_reg)
    if np.trace(Sb) <= 1e-12 * tr:
        warnings.warn("between-class scatter is zero: class means coincide", RuntimeWarning, stacklevel=3)
    return pairs.vectors[:, :d].T, pairs.values[:d]


def fit_p_lda(ltm: LabeledDataset, d: int) -> LinearMap:
    c = ltm.n_classes
    if d < 1 or d > c - 1:
        raise ValueError(f"LDA keeps at most c-1 = {c - 1} dimensions, asked for {d}")
    if ltm.n_instances <= c:
        raise InsufficientDataError(f"LDA needs more than {c} instances, got {ltm.n_instances}")
    W, _ = lda_directions(ltm.features, ltm.labels, c, d)
    return LinearMap(W, "lda")


def graph_laplacian_form(X, labels):
    """``X^T L X`` for the +1 same-class / -1 other-class weight graph.

    ``X`` holds one instance per row. Computed from class sums so the
    ``N x N`` weight matrix is never formed.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    N = X.shape[0]
    classes, inverse, counts = np.unique(labels, return_inverse=True, return_counts=True)
    degree = 2.0 * counts[inverse] - N
    sums = np.zeros((classes.size, X.shape[1]))
    np.add.at(sums, inverse, X)
    total = X.sum(axis=0)
    XDX = (X * degree[:, None]).T @ X
    XWX = 2.0 * sums.T @ sums - np.outer(total, total)
    return XDX - XWX


def graph_embedding_objective(P, X, labels):
    """Direct evaluation of ``1/2 sum_ij ||P x_i - P x_j||^2 W_ij``."""
    Z = np.asarray(X, dtype=np.float64) @ np.asarray(P, dtype=np.float64).T
    labels = np.asarray(labels)
    W = np.where(labels[:, None] == labels[None, :], 1.0, -1.0)
    sq = ((Z[:, None, :] - Z[None, :, :]) ** 2).sum(axis=-1)
    return 0.5 * float((sq * W).sum())


def fit_p_graph_embedding(ltm: LabeledDataset, d: int) -> LinearMap:
    """Orthonormal-row P minimizing the signed graph-embedding cost.

    Without a scale constraint the cost is unbounded below (the -1 weights
    reward stretching), so rows are constrained to ``P P^T = I`` and are the
    eigenvectors of ``X^T L X`` with the ``d`` smallest eigenvalues.
    """
    if ltm.n_instances < 2:
        raise InsufficientDataError("graph embedding needs at least two instances")
    if d < 1 or d > ltm.dim:
        raise ValueError(f"d must lie in 1..{ltm.dim}, got {d}")
    pairs = sym_eig(graph_laplacian_form(ltm.features, ltm.labels))
    return LinearMap(pairs.vectors[:, ::-1][:, :d].T, "graph_embedding")


def simplex_vertices(c, d=None):
    """Vertices of a regular simplex with ``c`` vertices, centred, unit circumradius.

    Returns a ``c x d`` array (``d`` defaults to ``c - 1``; extra dims are zero).
    """
    if c < 2:
        raise ValueError("a simplex needs at least two vertices")
    d = c - 1 if d is None else d
    if d < c - 1:
        raise ValueError(f"{c} equidistant vertices need at least {c - 1} dimensions")
    # Helmert rows span the complement of the all-ones vector
    H = np.zeros((c - 1, c))
    for k in range(1, c):
        H[k - 1, :k] = 1.0
        H[k - 1, k] = -k
        H[k - 1] /= np.sqrt(k * (k + 1))
    V = H.T / np.sqrt(1.0 - 1.0 / c)
    return np.hstack([V, np.zeros((c, d - (c - 1)))])


def fit_p_fixed_medians(ltm: LabeledDataset, d=None, eta=1.0):
    """Ridge-fit P sending every instance to its class's predefined simplex vertex."""
    targets = simplex_vertices(ltm.n_classes, d)
    G = targets[ltm.labels].T
    P = ridge_solve(ltm.features.T, G, eta)
    return LinearMap(P, "fixed_medians"), [t for t in targets]


def fit_h(combined: LatentEmbedding, d=None, n_classes=None) -> LinearMap:
    """LDA on the union of projected LTM and SM points, a ``d x d`` map.

    Falls back to the identity (with a warning) when there is only one class
    or the within-class scatter is degenerate.
    """
    dim = combined.dim
    d = dim if d is None else d
    if n_classes is None:
        n_classes = len(combined.classes) if combined.classes else int(combined.labels.max()) + 1
    present = np.unique(combined.labels).size
    if present < 2:
        warnings.warn("single class: H falls back to the identity", RuntimeWarning, stacklevel=2)
        return LinearMap.identity(dim)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            W, _ = lda_directions(combined.points, combined.labels, n_classes, d)
    except (DegenerateScatterError, SingularMatrixError):
        warnings.warn("degenerate within-class scatter: H falls back to the identity", RuntimeWarning, stacklevel=2)
        return LinearMap.identity(dim)
    return LinearMap(W, "lda")
