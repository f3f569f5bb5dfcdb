"""Final-stage classifiers: k nearest neighbours and a one-vs-one RBF SVM."""

from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Union

import numpy as np

from cdm import kernels
from cdm.dataset import LabeledDataset
from cdm.errors import ConvergenceError, DimensionMismatchError, InsufficientDataError
from cdm.median import LatentEmbedding


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "knn"
    k: int = 5
    svm_c: float = 1.0
    svm_gamma: Union[float, str] = "auto"
    svm_tol: float = 1e-3

    def __post_init__(self):
        if self.kind not in ("knn", "svm_rbf"):
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not self.svm_c > 0:
            raise ValueError("svm_c must be positive")
        if self.svm_gamma != "auto" and not float(self.svm_gamma) > 0:
            raise ValueError("svm_gamma must be positive or 'auto'")
        if not self.svm_tol > 0:
            raise ValueError("svm_tol must be positive")


def _xy(data):
    if isinstance(data, LabeledDataset):
        return data.features, data.labels
    if isinstance(data, LatentEmbedding):
        return data.points, data.labels
    X, y = data
    return np.atleast_2d(np.asarray(X, dtype=np.float64)), np.asarray(y, dtype=np.intp)


def _x(data):
    if isinstance(data, LabeledDataset):
        return data.features
    if isinstance(data, LatentEmbedding):
        return data.points
    return np.atleast_2d(np.asarray(data, dtype=np.float64))


def knn_predict(train, query, k=5, n_classes=None):
    """Majority vote among the ``k`` nearest training rows (Euclidean).

    ``train`` is a dataset/embedding or an ``(X, y)`` pair of label codes. Ties
    in the vote go to the class of the nearest tied neighbour, then to the
    smaller class code; equidistant neighbours are ordered by class code, so
    the result does not depend on the order of the training rows.
    """
    X, y = _xy(train)
    Q = _x(query)
    if X.shape[0] == 0:
        raise InsufficientDataError("empty training set")
    if Q.shape[1] != X.shape[1]:
        raise DimensionMismatchError(f"query dimension {Q.shape[1]} != training dimension {X.shape[1]}")
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    k = min(k, X.shape[0])
    by_class = np.argsort(y, kind="stable")
    D = kernels.pairwise_dist(Q, X[by_class])
    nearest = by_class[np.argsort(D, axis=1, kind="stable")[:, :k]]
    neigh = y[nearest]
    rows = np.arange(Q.shape[0])[:, None]
    votes = np.zeros((Q.shape[0], n_classes), dtype=np.intp)
    np.add.at(votes, (np.broadcast_to(rows, neigh.shape), neigh), 1)
    first = np.full((Q.shape[0], n_classes), k, dtype=np.intp)
    for pos in range(k - 1, -1, -1):
        first[rows[:, 0], neigh[:, pos]] = pos
    tied = votes == votes.max(axis=1, keepdims=True)
    return np.argmin(np.where(tied, first, k + 1), axis=1)


def rbf_kernel(A, B, gamma):
    D = kernels.pairwise_dist(A, B)
    return np.exp(-gamma * D * D)


def auto_gamma(X):
    var = float(np.asarray(X).var())
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0 / X.shape[1]


@dataclass(frozen=True)
class BinarySvm:
    """Decision ``sum_i coef_i K(sv_i, x) + bias``; positive means ``pos_class``."""

    pos_class: int
    neg_class: int
    support: np.ndarray
    coef: np.ndarray
    bias: float
    iterations: int = 0


@dataclass(frozen=True)
class SvmModel:
    n_classes: int
    gamma: float
    machines: List[BinarySvm] = field(default_factory=list)


def _dual_objective(alpha, K, y):
    v = alpha * y
    return 0.5 * float(v @ K @ v) - float(alpha.sum())


def fit_binary_svm(X, y, C, gamma, tol, pos_class=1, neg_class=0) -> BinarySvm:
    """SMO on labels ``y`` in {+1, -1}."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    K = rbf_kernel(X, X, gamma)
    cap = 10_000 * X.shape[0]
    alpha, bias, iters, converged = kernels.smo(K, y, float(C), float(tol), cap)
    if not converged:
        raise ConvergenceError(f"SMO hit the iteration cap ({cap})")
    sv = alpha > 0
    return BinarySvm(pos_class, neg_class, X[sv].copy(), (alpha * y)[sv], bias, iters)


def binary_decision(machine: BinarySvm, X, gamma):
    if machine.support.shape[0] == 0:
        return np.full(np.atleast_2d(X).shape[0], machine.bias)
    return rbf_kernel(X, machine.support, gamma) @ machine.coef + machine.bias


def svm_fit(train, spec: ClassifierSpec, n_classes=None) -> SvmModel:
    """One-vs-one RBF SVMs, one per pair of classes present in ``train``."""
    X, y = _xy(train)
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    present = np.unique(y)
    if present.size < 2:
        raise InsufficientDataError("SVM needs at least two classes")
    gamma = auto_gamma(X) if spec.svm_gamma == "auto" else float(spec.svm_gamma)
    machines = []
    for a, b in combinations(present.tolist(), 2):
        idx = np.flatnonzero((y == a) | (y == b))
        yy = np.where(y[idx] == a, 1.0, -1.0)
        machines.append(fit_binary_svm(X[idx], yy, spec.svm_c, gamma, spec.svm_tol, a, b))
    return SvmModel(n_classes, gamma, machines)


def svm_predict(model: SvmModel, query):
    Q = _x(query)
    votes = np.zeros((Q.shape[0], model.n_classes), dtype=np.intp)
    for m in model.machines:
        if m.support.shape[0] and m.support.shape[1] != Q.shape[1]:
            raise DimensionMismatchError(f"query dimension {Q.shape[1]} != {m.support.shape[1]}")
        winner = np.where(binary_decision(m, Q, model.gamma) > 0, m.pos_class, m.neg_class)
        votes[np.arange(Q.shape[0]), winner] += 1
    return np.argmax(votes, axis=1)


def fit_predict(spec: ClassifierSpec, train, query, n_classes=None):
    """Train the classifier described by ``spec`` and label ``query``."""
    if spec.kind == "knn":
        return knn_predict(train, query, spec.k, n_classes)
    _, y = _xy(train)
    if np.unique(y).size < 2:
        return np.full(_x(query).shape[0], int(y[0]), dtype=np.intp)
    return svm_predict(svm_fit(train, spec, n_classes), query)


def accuracy(predicted, truth):
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise DimensionMismatchError(f"{predicted.shape[0]} predictions for {truth.shape[0]} labels")
    if truth.size == 0:
        raise InsufficientDataError("accuracy of an empty label set")
    return float(np.mean(predicted == truth))
