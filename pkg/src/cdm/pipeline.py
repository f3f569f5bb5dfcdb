"""End-to-end CDM: fit P, medians, Q and H; build classifier features; diagnostics."""

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from cdm import kernels
from cdm.classify import ClassifierSpec, accuracy, fit_predict
from cdm.dataset import LabeledDataset, align_classes
from cdm.discriminant import LinearMap, fit_h, fit_p_fixed_medians, fit_p_graph_embedding, fit_p_lda
from cdm.errors import CdmError, ClassMismatchError, ConfigError, DimensionMismatchError, InsufficientDataError, ModelFormatError, StageError
from cdm.mapping import apply_map, fit_q
from cdm.median import ClusterSummary, LatentEmbedding, cluster_summaries, pairwise_disjoint

P_APPROACHES = ("lda", "graph_embedding", "fixed_medians")


@dataclass(frozen=True)
class CdmConfig:
    """Settings for one CDM fit.

    ``latent_dim="auto"`` means ``c - 1``. ``standardize`` z-scores each
    domain with its own training statistics before P and Q are fit;
    ``sm_bias`` appends a constant-1 feature to SM inputs so Q becomes
    affine; ``block_rescale`` z-scores the two augmentation blocks.
    """

    p_approach: str = "lda"
    latent_dim: Union[int, str] = "auto"
    eta: float = 1.0
    use_augmentation: bool = False
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec)
    block_rescale: bool = False
    standardize: bool = True
    sm_bias: bool = False
    squared_psi: bool = False

    def __post_init__(self):
        if self.p_approach not in P_APPROACHES:
            raise ConfigError(f"p_approach must be one of {P_APPROACHES}, got {self.p_approach!r}")
        if self.latent_dim != "auto" and (not isinstance(self.latent_dim, int) or self.latent_dim < 1):
            raise ConfigError(f"latent_dim must be a positive integer or 'auto', got {self.latent_dim!r}")
        if not self.eta >= 0:
            raise ConfigError("eta must be nonnegative")

    def resolve_dim(self, n_classes):
        d = n_classes - 1 if self.latent_dim == "auto" else self.latent_dim
        if d < 1:
            raise ConfigError("latent dimension must be at least 1 (need two or more classes)")
        if self.p_approach == "lda" and d > n_classes - 1:
            raise ConfigError(f"LDA latent_dim must be <= c-1 = {n_classes - 1}, got {d}")
        return d

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        clf = d.pop("classifier", {})
        if not isinstance(clf, ClassifierSpec):
            clf = ClassifierSpec(**clf)
        try:
            return cls(classifier=clf, **d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X):
        X = np.asarray(X, dtype=np.float64)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        return cls(X.mean(axis=0), scale)

    @classmethod
    def identity(cls, dim):
        return cls(np.zeros(dim), np.ones(dim))

    def __call__(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.mean.shape[0]:
            raise DimensionMismatchError(f"data has {X.shape[1]} features, expected {self.mean.shape[0]}")
        return (X - self.mean) / self.scale


@dataclass(frozen=True)
class CdmModel:
    P: LinearMap
    Q: LinearMap
    H: LinearMap
    medians: List[ClusterSummary]
    config: CdmConfig
    classes: tuple
    ltm_scaler: Standardizer
    sm_scaler: Standardizer

    @property
    def latent_dim(self):
        return self.P.target_dim

    @property
    def ltm_dim(self):
        return self.P.source_dim

    @property
    def sm_dim(self):
        return self.sm_scaler.mean.shape[0]

    def ltm_inputs(self, X):
        return self.ltm_scaler(_features(X))

    def sm_inputs(self, Y):
        Y = self.sm_scaler(_features(Y))
        if self.config.sm_bias:
            Y = np.hstack([Y, np.ones((Y.shape[0], 1))])
        return Y

    def omega_ltm(self, X):
        """LTM rows projected by P into the latent space."""
        return self.ltm_inputs(X) @ self.P.matrix.T

    def omega_sm(self, Y):
        return self.sm_inputs(Y) @ self.Q.matrix.T

    def latent_ltm(self, X):
        """``H P x`` for each row."""
        return self.omega_ltm(X) @ self.H.matrix.T

    def latent_sm(self, Y):
        return self.omega_sm(Y) @ self.H.matrix.T


def _features(data):
    if isinstance(data, LabeledDataset):
        return data.features
    return np.atleast_2d(np.asarray(data, dtype=np.float64))


def _check_classes(ltm: LabeledDataset, sm: LabeledDataset):
    if set(ltm.classes) != set(sm.classes):
        raise ClassMismatchError(
            f"class sets differ: LTM-only {sorted(set(ltm.classes) - set(sm.classes), key=str)}, "
            f"SM-only {sorted(set(sm.classes) - set(ltm.classes), key=str)}"
        )
    for data in (ltm, sm):
        empty = [data.classes[c] for c, n in enumerate(data.class_counts()) if n == 0]
        if empty:
            raise ClassMismatchError(f"{data.domain_tag or 'dataset'} has no instances of {empty}")


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except CdmError as exc:
        raise StageError(name, exc) from exc
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise StageError(name, exc) from exc


def cdm_fit(ltm: LabeledDataset, sm_train: LabeledDataset, config: CdmConfig = CdmConfig()) -> CdmModel:
    """Fit P on LTM, take class medians, fit Q toward them, then H on both."""
    _check_classes(ltm, sm_train)
    sm_train = align_classes(sm_train, ltm.classes)
    c = ltm.n_classes
    d = config.resolve_dim(c)

    if config.standardize:
        ltm_scaler = Standardizer.fit(ltm.features)
        sm_scaler = Standardizer.fit(sm_train.features)
    else:
        ltm_scaler = Standardizer.identity(ltm.dim)
        sm_scaler = Standardizer.identity(sm_train.dim)
    X = ltm.with_features(ltm_scaler(ltm.features))
    Y = sm_train.features if not config.standardize else sm_scaler(sm_train.features)
    if config.sm_bias:
        Y = np.hstack([Y, np.ones((Y.shape[0], 1))])
    Y = sm_train.with_features(Y)

    if config.p_approach == "lda":
        P = _stage("fit P (lda)", fit_p_lda, X, d)
    elif config.p_approach == "graph_embedding":
        P = _stage("fit P (graph embedding)", fit_p_graph_embedding, X, d)
    else:
        P, _ = _stage("fit P (fixed medians)", fit_p_fixed_medians, X, d, config.eta)

    U = apply_map(P, X)
    medians = _stage("cluster medians", cluster_summaries, U, c)
    Q = _stage("fit Q", fit_q, Y, medians, config.eta)
    V = apply_map(Q, Y)
    union = LatentEmbedding(np.vstack([U.points, V.points]), np.concatenate([U.labels, V.labels]), ltm.classes)
    H = _stage("fit H", fit_h, union, d, c)
    return CdmModel(P, Q, H, medians, config, ltm.classes, ltm_scaler, sm_scaler)


# ------------------------------------------------------------- prediction


def _block_scaler(rows):
    mean = rows.mean(axis=0)
    scale = rows.std(axis=0)
    scale[scale == 0.0] = 1.0
    return mean, scale


def training_set(model: CdmModel, ltm_train: LabeledDataset, sm_train: LabeledDataset):
    """Classifier training matrix and a transform for SM query rows.

    Rows are ``[H P x, 0]`` / ``[H Q y, y]`` with augmentation, otherwise
    ``H P x`` / ``H Q y``. Returns ``(X, labels, query_transform)``.
    """
    ltm_train = align_classes(ltm_train, model.classes)
    sm_train = align_classes(sm_train, model.classes)
    cfg = model.config
    d = model.latent_dim

    def sm_rows(Y):
        latent = model.latent_sm(Y)
        if not cfg.use_augmentation:
            return latent
        return np.hstack([latent, model.sm_inputs(Y)])

    Xl = model.latent_ltm(ltm_train)
    if cfg.use_augmentation:
        Xl = np.hstack([Xl, np.zeros((Xl.shape[0], model.Q.source_dim))])
    Xs = sm_rows(sm_train)
    X = np.vstack([Xl, Xs])
    labels = np.concatenate([ltm_train.labels, sm_train.labels])

    if cfg.use_augmentation and cfg.block_rescale:
        lat_mean, lat_scale = _block_scaler(X[:, :d])
        # raw block is only scaled so LTM rows keep their zero padding
        raw_scale = Xs[:, d:].std(axis=0)
        raw_scale[raw_scale == 0.0] = 1.0

        def rescale(R):
            return np.hstack([(R[:, :d] - lat_mean) / lat_scale, R[:, d:] / raw_scale])

        return rescale(X), labels, lambda Y: rescale(sm_rows(Y))
    return X, labels, sm_rows


def cdm_predict(model: CdmModel, ltm_train, sm_train, sm_query, classifier: Optional[ClassifierSpec] = None):
    """Label codes (indices into ``model.classes``) for the SM query rows."""
    spec = classifier or model.config.classifier
    X, y, transform = training_set(model, ltm_train, sm_train)
    return fit_predict(spec, (X, y), transform(_features(sm_query)), len(model.classes))


def baseline_predict(sm_train: LabeledDataset, sm_query, classifier: ClassifierSpec):
    """The same classifier trained on the raw SM training rows only."""
    return fit_predict(classifier, sm_train, _features(sm_query), sm_train.n_classes)


# ------------------------------------------------------------ diagnostics


def compute_psi(ltm_emb: LatentEmbedding, sm_emb: LatentEmbedding, squared=False):
    """Summed same-class (psi_s) and different-class (psi_d) distances.

    Pairs run over LTM x SM, and over unordered pairs within each domain.
    """
    if ltm_emb.dim != sm_emb.dim:
        raise DimensionMismatchError(f"latent dims differ: {ltm_emb.dim} vs {sm_emb.dim}")
    return kernels.psi_sums(ltm_emb.points, ltm_emb.labels, sm_emb.points, sm_emb.labels, bool(squared))


@dataclass(frozen=True)
class Diagnostics:
    psi_s: float
    psi_d: float
    disjoint: bool
    margins: np.ndarray
    radii: np.ndarray
    err_sm_only: float
    err_combined: float

    def satisfies_bounds(self, upper, lower):
        """Report whether ``psi_s <= upper`` and ``psi_d >= lower``; nothing is enforced."""
        return self.psi_s <= upper and self.psi_d >= lower

    def to_dict(self):
        return {
            "psi_s": self.psi_s,
            "psi_d": self.psi_d,
            "disjoint": self.disjoint,
            "margins": self.margins.tolist(),
            "radii": self.radii.tolist(),
            "err_sm_only": self.err_sm_only,
            "err_combined": self.err_combined,
        }


def hypothesis_check(model: CdmModel, ltm: Optional[LabeledDataset], sm_train: LabeledDataset,
                     sm_holdout: LabeledDataset, classifier: Optional[ClassifierSpec] = None) -> Diagnostics:
    """Compare holdout error trained on projected SM only versus LTM+SM.

    Errors are measured in the final ``H``-space. psi, radii and margins
    are computed in the latent space before ``H``, on clusters that pool
    the projected LTM and SM training points. ``ltm=None`` means an empty
    LTM sample, in which case both errors coincide.
    """
    if sm_holdout is None or sm_holdout.n_instances == 0:
        raise InsufficientDataError("hypothesis check needs a non-empty holdout")
    spec = classifier or model.config.classifier
    c = len(model.classes)
    sm_train = align_classes(sm_train, model.classes)
    sm_holdout = align_classes(sm_holdout, model.classes)
    V = model.latent_sm(sm_train)
    Vh = model.latent_sm(sm_holdout)
    err_sm = 1.0 - accuracy(fit_predict(spec, (V, sm_train.labels), Vh, c), sm_holdout.labels)
    omega_v = LatentEmbedding(model.omega_sm(sm_train), sm_train.labels, model.classes)
    if ltm is None:
        err_comb = err_sm
        pooled = omega_v
        psi_s, psi_d = compute_psi(LatentEmbedding(np.empty((0, model.latent_dim)), [], model.classes),
                                   omega_v, model.config.squared_psi)
    else:
        ltm = align_classes(ltm, model.classes)
        U = model.latent_ltm(ltm)
        train = (np.vstack([U, V]), np.concatenate([ltm.labels, sm_train.labels]))
        err_comb = 1.0 - accuracy(fit_predict(spec, train, Vh, c), sm_holdout.labels)
        omega_u = LatentEmbedding(model.omega_ltm(ltm), ltm.labels, model.classes)
        psi_s, psi_d = compute_psi(omega_u, omega_v, model.config.squared_psi)
        pooled = LatentEmbedding(np.vstack([omega_u.points, omega_v.points]),
                                 np.concatenate([omega_u.labels, omega_v.labels]), model.classes)
    summaries = cluster_summaries(pooled, c)
    flag, margins = pairwise_disjoint(summaries)
    radii = np.array([s.radius for s in summaries])
    return Diagnostics(float(psi_s), float(psi_d), flag, margins, radii, float(err_sm), float(err_comb))


# ---------------------------------------------------------- serialization

MODEL_FORMAT = "cdm-model"
MODEL_VERSION = 1


def _matrix_doc(M):
    M = np.asarray(M, dtype=np.float64)
    return {"shape": list(M.shape), "data": [float(v) for v in M.ravel(order="C")]}


def _matrix_from(doc):
    shape = tuple(int(s) for s in doc["shape"])
    data = np.asarray(doc["data"], dtype=np.float64)
    if data.size != int(np.prod(shape)):
        raise ModelFormatError(f"matrix data has {data.size} entries for shape {shape}")
    return data.reshape(shape)


def model_to_dict(model: CdmModel):
    def lin(m):
        return {"kind": m.kind, **_matrix_doc(m.matrix)}

    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "classes": list(model.classes),
        "config": model.config.to_dict(),
        "P": lin(model.P),
        "Q": lin(model.Q),
        "H": lin(model.H),
        "medians": [
            {"class_id": s.class_id, "median": [float(v) for v in s.median], "radius": s.radius, "count": s.count}
            for s in model.medians
        ],
        "ltm_scaler": {"mean": _matrix_doc(model.ltm_scaler.mean), "scale": _matrix_doc(model.ltm_scaler.scale)},
        "sm_scaler": {"mean": _matrix_doc(model.sm_scaler.mean), "scale": _matrix_doc(model.sm_scaler.scale)},
    }


def model_from_dict(doc) -> CdmModel:
    try:
        if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
            raise ModelFormatError("not a CDM model document (format/version mismatch)")

        def lin(key):
            return LinearMap(_matrix_from(doc[key]), doc[key]["kind"])

        medians = [
            ClusterSummary(int(s["class_id"]), np.asarray(s["median"], dtype=np.float64), float(s["radius"]), int(s["count"]))
            for s in doc["medians"]
        ]
        model = CdmModel(
            lin("P"), lin("Q"), lin("H"), medians,
            CdmConfig.from_dict(doc["config"]),
            tuple(doc["classes"]),
            Standardizer(_matrix_from(doc["ltm_scaler"]["mean"]), _matrix_from(doc["ltm_scaler"]["scale"])),
            Standardizer(_matrix_from(doc["sm_scaler"]["mean"]), _matrix_from(doc["sm_scaler"]["scale"])),
        )
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ModelFormatError(f"corrupt model document: {exc!r}") from None
    if model.P.target_dim != model.Q.target_dim or model.H.source_dim != model.P.target_dim:
        raise ModelFormatError("P, Q and H dimensions do not compose")
    if len(medians) != len(model.classes):
        raise ModelFormatError("medians do not cover every class")
    return model


def save_model(model: CdmModel, path):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n", encoding="utf-8")


def load_model(path) -> CdmModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: top level is not an object")
    return model_from_dict(doc)


def with_config(model: CdmModel, **changes) -> CdmModel:
    """Copy of ``model`` with prediction-time config fields replaced."""
    return replace(model, config=replace(model.config, **changes))
