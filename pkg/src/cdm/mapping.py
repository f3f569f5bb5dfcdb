"""Fit the SM-side map Q toward class medians and apply linear maps to data."""

from typing import Sequence, Union

import numpy as np

from cdm.dataset import LabeledDataset
from cdm.discriminant import LinearMap
from cdm.errors import ClassMismatchError, DimensionMismatchError
from cdm.median import ClusterSummary, LatentEmbedding
from cdm.numerics import ridge_solve


def median_targets(labels, summaries: Sequence[ClusterSummary]):
    """``d x N`` matrix whose i-th column is the median of instance i's class."""
    by_class = {s.class_id: s.median for s in summaries}
    missing = sorted(set(np.unique(labels).tolist()) - set(by_class))
    if missing:
        raise ClassMismatchError(f"no cluster median for class codes {missing}")
    return np.column_stack([by_class[int(c)] for c in labels])


def q_objective(Q, inputs, targets, eta):
    """``sum_i ||Q y_i - g_i||^2 + eta ||Q||_F^2`` with inputs/targets as columns."""
    R = np.asarray(Q) @ np.asarray(inputs) - np.asarray(targets)
    return float((R * R).sum() + eta * (np.asarray(Q) ** 2).sum())


def fit_q(sm_train: LabeledDataset, summaries: Sequence[ClusterSummary], eta=1.0) -> LinearMap:
    """Ridge map pulling each SM instance onto the median of its class."""
    G = median_targets(sm_train.labels, summaries)
    return LinearMap(ridge_solve(sm_train.features.T, G, eta), "ridge_to_medians")


def apply_map(map: LinearMap, data: Union[LabeledDataset, LatentEmbedding]) -> LatentEmbedding:
    """Map every instance (row) of ``data`` through ``map``; labels carry over."""
    X = data.features if isinstance(data, LabeledDataset) else data.points
    if X.shape[1] != map.source_dim:
        raise DimensionMismatchError(f"data has dimension {X.shape[1]}, map expects {map.source_dim}")
    return LatentEmbedding(X @ map.matrix.T, data.labels, data.classes)
