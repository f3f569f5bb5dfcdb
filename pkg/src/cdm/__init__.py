"""Cognitive discriminative mappings for few-shot learning across heterogeneous domains."""

from cdm.classify import ClassifierSpec, accuracy, fit_predict, knn_predict
from cdm.dataset import LabeledDataset, load_dense_csv, load_sparse_libsvm, pca_apply, pca_fit, sample_split
from cdm.discriminant import LinearMap, fit_h, fit_p_fixed_medians, fit_p_graph_embedding, fit_p_lda
from cdm.errors import CdmError
from cdm.kernels import BACKEND
from cdm.mapping import fit_q
from cdm.median import cluster_summaries, geometric_median, pairwise_disjoint
from cdm.pipeline import (
    CdmConfig,
    CdmModel,
    cdm_fit,
    cdm_predict,
    hypothesis_check,
    load_model,
    save_model,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CdmConfig", "CdmError", "CdmModel", "ClassifierSpec", "LabeledDataset", "LinearMap",
    "accuracy", "cdm_fit", "cdm_predict", "cluster_summaries", "fit_h", "fit_p_fixed_medians",
    "fit_p_graph_embedding", "fit_p_lda", "fit_predict", "fit_q", "geometric_median", "hypothesis_check",
    "knn_predict", "load_dense_csv", "load_model", "load_sparse_libsvm", "pairwise_disjoint", "pca_apply",
    "pca_fit", "sample_split", "save_model",
]
