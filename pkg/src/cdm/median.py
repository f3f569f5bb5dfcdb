"""Geometric medians, cluster radii and the pairwise-disjointness test."""

from dataclasses import dataclass
from typing import List, NamedTuple, Sequence

import numpy as np

from cdm import kernels
from cdm.errors import ConvergenceError, InsufficientDataError
from cdm.numerics import pairwise_dist


@dataclass(frozen=True)
class LatentEmbedding:
    """Points in the shared latent space with their class codes."""

    points: np.ndarray
    labels: np.ndarray
    classes: tuple = ()

    def __post_init__(self):
        P = np.array(self.points, dtype=np.float64)
        if P.ndim != 2 or P.shape[1] < 1:
            raise ValueError(f"points must be an N x d matrix with d >= 1, got {P.shape}")
        y = np.array(self.labels, dtype=np.intp).reshape(-1)
        if y.shape[0] != P.shape[0]:
            raise ValueError(f"{y.shape[0]} labels for {P.shape[0]} points")
        if not np.all(np.isfinite(P)):
            raise ValueError("embedding has non-finite entries")
        P.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class ClusterSummary:
    class_id: int
    median: np.ndarray
    radius: float
    count: int


class MedianResult(NamedTuple):
    median: np.ndarray
    iterations: int
    objective_trace: np.ndarray


def weiszfeld_objective(points, p):
    return float(np.linalg.norm(np.asarray(points, dtype=np.float64) - p, axis=1).sum())


def median_gap(points, p):
    """Optimality surrogate for the Fermat-Weber problem at ``p``.

    The gradient norm of the summed distances away from data points; at a
    data point of multiplicity ``k`` it is ``max(0, |pull| - k)`` where
    ``pull`` sums the unit vectors toward the other points.
    """
    X = np.asarray(points, dtype=np.float64)
    diff = X - np.asarray(p, dtype=np.float64)
    dist = np.linalg.norm(diff, axis=1)
    on = dist == 0.0
    pull = (diff[~on] / dist[~on, None]).sum(axis=0)
    return max(0.0, float(np.linalg.norm(pull)) - float(on.sum()))


def geometric_median(points, tol=1e-9, max_iter=1000, return_info=False):
    """Fermat-Weber point of the rows of ``points`` by Weiszfeld iteration.

    Iterates that land on a data point use the Vardi-Zhang modified step, and
    the iteration stops at a data point as soon as that point satisfies the
    vertex optimality condition. Two points return their midpoint.

    Raises
    ------
    ConvergenceError
        If the iterate still moves more than ``tol`` after ``max_iter`` steps.
    """
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if X.shape[0] < 1:
        raise InsufficientDataError("geometric median of an empty set")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if X.shape[0] <= 2:
        m = X.mean(axis=0)
        info = MedianResult(m, 0, np.array([weiszfeld_objective(X, m)]))
        return info if return_info else m
    median, iters, converged, move, trace = kernels.weiszfeld(X, float(tol), int(max_iter))
    if not converged:
        raise ConvergenceError(f"Weiszfeld did not converge in {max_iter} iterations", gap=move)
    median = np.asarray(median)
    return MedianResult(median, iters, trace) if return_info else median


def cluster_summaries(emb: LatentEmbedding, n_classes=None, tol=1e-9, max_iter=1000) -> List[ClusterSummary]:
    """One summary per class code ``0..n_classes-1``; radius is the max distance to the median."""
    if n_classes is None:
        n_classes = len(emb.classes) if emb.classes else int(emb.labels.max()) + 1
    out = []
    for c in range(n_classes):
        members = emb.points[emb.labels == c]
        if members.shape[0] == 0:
            name = emb.classes[c] if emb.classes else c
            raise InsufficientDataError(f"class {name!r} has no points")
        med = geometric_median(members, tol=tol, max_iter=max_iter)
        radius = float(pairwise_dist(members, med[None, :]).max())
        out.append(ClusterSummary(c, med, radius, members.shape[0]))
    return out


def pairwise_disjoint(summaries: Sequence[ClusterSummary]):
    """Return ``(flag, margins)`` with ``margins[i, j] = d(m_i, m_j) - r_i - r_j``.

    The diagonal of ``margins`` is zero and carries no meaning; ``flag`` is
    true when every off-diagonal margin is strictly positive.
    """
    if len(summaries) < 2:
        raise InsufficientDataError("need at least two clusters")
    M = np.vstack([s.median for s in summaries])
    r = np.array([s.radius for s in summaries])
    margins = pairwise_dist(M, M) - r[:, None] - r[None, :]
    # mirror the upper triangle so the matrix is exactly symmetric
    upper = np.triu(margins, k=1)
    margins = upper + upper.T
    off = ~np.eye(len(summaries), dtype=bool)
    return bool(np.all(margins[off] > 0.0)), margins
