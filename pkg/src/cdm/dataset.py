"""Labeled datasets: loading, writing, PCA preprocessing and few-shot splits."""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from cdm.errors import (
    DimensionMismatchError,
    EmptyFileError,
    InsufficientDataError,
    NonNumericCellError,
    SparseIndexError,
    UnknownColumnError,
    ZeroVarianceError,
)
from cdm.numerics import fix_signs, sym_eig


def _coerce_labels(raw):
    """Parse labels as ints when every token is integral, else keep strings."""
    try:
        return [int(tok) for tok in raw]
    except ValueError:
        return [str(tok) for tok in raw]


@dataclass(frozen=True)
class LabeledDataset:
    """Instances of one domain with class labels.

    ``labels`` holds dense codes ``0..c-1`` indexing into ``classes``, the
    sorted list of distinct original class ids.
    """

    features: np.ndarray
    labels: np.ndarray
    classes: tuple
    domain_tag: str = ""

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64)
        y = np.array(self.labels, dtype=np.intp)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"features must be a non-empty N x m matrix, got {X.shape}")
        if y.shape != (X.shape[0],):
            raise DimensionMismatchError(f"{y.shape[0]} labels for {X.shape[0]} instances")
        if not np.all(np.isfinite(X)):
            raise ValueError("features contain non-finite values")
        classes = tuple(self.classes)
        if len(set(classes)) != len(classes):
            raise ValueError("classes contain duplicates")
        if y.size and (y.min() < 0 or y.max() >= len(classes)):
            raise ValueError("label code outside the class list")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "classes", classes)

    @classmethod
    def from_labels(cls, features, labels, domain_tag="", classes=None):
        """Build from raw class ids; ``classes`` defaults to their sorted set."""
        labels = list(labels)
        if classes is None:
            classes = sorted(set(labels))
        index = {c: i for i, c in enumerate(classes)}
        try:
            codes = [index[lab] for lab in labels]
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} not in class list") from None
        return cls(features, np.asarray(codes, dtype=np.intp), tuple(classes), domain_tag)

    @property
    def n_instances(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    @property
    def n_classes(self):
        return len(self.classes)

    def raw_labels(self):
        return [self.classes[i] for i in self.labels]

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, index):
        index = np.asarray(index, dtype=np.intp)
        return LabeledDataset(self.features[index], self.labels[index], self.classes, self.domain_tag)

    def with_features(self, features):
        return LabeledDataset(features, self.labels, self.classes, self.domain_tag)


# ---------------------------------------------------------------- file formats


def load_dense_csv(path, label_column="label", domain_tag=None) -> LabeledDataset:
    """Read a header-row CSV; every column except ``label_column`` is a feature."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise EmptyFileError("file is empty", path=path)
    header = [h.strip() for h in rows[0]]
    if label_column not in header:
        raise UnknownColumnError(f"label column {label_column!r} not in header", path=path)
    if len(rows) < 2:
        raise EmptyFileError("no data rows", path=path)
    li = header.index(label_column)
    feature_cols = [j for j in range(len(header)) if j != li]
    if not feature_cols:
        raise EmptyFileError("no feature columns", path=path)
    X = np.empty((len(rows) - 1, len(feature_cols)))
    raw = []
    for r, row in enumerate(rows[1:]):
        line = r + 2
        if len(row) != len(header):
            raise NonNumericCellError(f"expected {len(header)} cells, got {len(row)}", path=path, row=line)
        raw.append(row[li].strip())
        for k, j in enumerate(feature_cols):
            try:
                X[r, k] = float(row[j])
            except ValueError:
                raise NonNumericCellError(f"non-numeric value {row[j]!r}", path=path, row=line, column=header[j]) from None
    if not np.all(np.isfinite(X)):
        raise NonNumericCellError("non-finite feature value", path=path)
    return LabeledDataset.from_labels(X, _coerce_labels(raw), domain_tag or path.stem)


def write_dense_csv(data: LabeledDataset, path, label_column="label"):
    """Write ``data`` so that :func:`load_dense_csv` reproduces it exactly."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([label_column] + [f"f{j}" for j in range(data.dim)])
        for lab, row in zip(data.raw_labels(), data.features):
            w.writerow([lab] + [repr(float(v)) for v in row])


def load_sparse_libsvm(path, dim: int, domain_tag=None) -> LabeledDataset:
    """Read ``label idx:val ...`` lines with 1-based increasing indices."""
    path = Path(path)
    if dim < 1:
        raise ValueError("dim must be positive")
    rows, raw = [], []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            raw.append(tokens[0])
            row = np.zeros(dim)
            prev = 0
            for tok in tokens[1:]:
                idx_s, sep, val_s = tok.partition(":")
                try:
                    idx, val = int(idx_s), float(val_s)
                except ValueError:
                    raise SparseIndexError(f"malformed token {tok!r}", path=path, row=lineno) from None
                if not sep or not math.isfinite(val):
                    raise SparseIndexError(f"malformed token {tok!r}", path=path, row=lineno)
                if idx < 1 or idx > dim:
                    raise SparseIndexError(f"index {idx} outside 1..{dim}", path=path, row=lineno)
                if idx <= prev:
                    raise SparseIndexError(f"index {idx} not increasing", path=path, row=lineno)
                prev = idx
                row[idx - 1] = val
            rows.append(row)
    if not rows:
        raise EmptyFileError("file is empty", path=path)
    return LabeledDataset.from_labels(np.vstack(rows), _coerce_labels(raw), domain_tag or path.stem)


def write_sparse_libsvm(data: LabeledDataset, path):
    with Path(path).open("w", encoding="utf-8") as fh:
        for lab, row in zip(data.raw_labels(), data.features):
            nz = np.flatnonzero(row)
            items = " ".join(f"{j + 1}:{float(row[j])!r}" for j in nz)
            fh.write(f"{lab} {items}".rstrip() + "\n")


# ----------------------------------------------------------------------- PCA


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    basis: np.ndarray
    energy_kept: float
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def n_components(self):
        return self.basis.shape[1]


# above this many features the covariance matrix is avoided in favour of an SVD
_DENSE_COV_LIMIT = 4000


def pca_fit(data: LabeledDataset, energy: float) -> PcaModel:
    """Keep the fewest leading components whose variance share reaches ``energy``."""
    if not 0.0 < energy <= 1.0:
        raise ValueError("energy must lie in (0, 1]")
    X = data.features
    if X.shape[0] < 2:
        raise InsufficientDataError("PCA needs at least two instances")
    mean = X.mean(axis=0)
    Xc = X - mean
    if X.shape[1] <= _DENSE_COV_LIMIT:
        values, vectors = sym_eig(Xc.T @ Xc / (X.shape[0] - 1))
    else:
        _, s, vt = np.linalg.svd(Xc, full_matrices=False)
        values, vectors = s**2 / (X.shape[0] - 1), fix_signs(vt.T)
    values = np.clip(values, 0.0, None)
    total = values.sum()
    if total <= 0.0:
        raise ZeroVarianceError("all instances are identical")
    share = np.cumsum(values) / total
    k = int(np.searchsorted(share, energy * (1.0 - 1e-12)) + 1)
    k = min(k, int(np.count_nonzero(values > values[0] * 1e-12)))
    return PcaModel(mean, vectors[:, :k].copy(), float(share[k - 1]), values)


def pca_apply(model: PcaModel, data: LabeledDataset) -> LabeledDataset:
    if data.dim != model.mean.shape[0]:
        raise DimensionMismatchError(f"data has {data.dim} features, PCA expects {model.mean.shape[0]}")
    return data.with_features((data.features - model.mean) @ model.basis)


# -------------------------------------------------------------------- splits


@dataclass(frozen=True)
class SplitSpec:
    k_per_class: int
    seed: int = 0
    rounds: int = 10

    def __post_init__(self):
        if self.k_per_class < 1 or self.rounds < 1:
            raise ValueError("k_per_class and rounds must be positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


class Split(NamedTuple):
    train: LabeledDataset
    test: Optional[LabeledDataset]
    empty_test_classes: tuple


def sample_split(data: LabeledDataset, spec: SplitSpec, round: int = 0) -> Split:
    """Draw ``k_per_class`` training rows per class; the rest form the test set.

    The draw depends only on ``(spec.seed, round)``. ``test`` is None when no
    rows remain; classes with no test rows are listed in ``empty_test_classes``.
    """
    counts = data.class_counts()
    short = [data.classes[c] for c in range(data.n_classes) if counts[c] < spec.k_per_class]
    if short:
        raise InsufficientDataError(
            f"classes {short} have fewer than {spec.k_per_class} instances"
        )
    rng = np.random.default_rng([spec.seed, round])
    train_idx = []
    for c in range(data.n_classes):
        members = np.flatnonzero(data.labels == c)
        train_idx.append(np.sort(rng.permutation(members)[: spec.k_per_class]))
    train_idx = np.concatenate(train_idx)
    mask = np.ones(data.n_instances, dtype=bool)
    mask[train_idx] = False
    test_idx = np.flatnonzero(mask)
    empty = tuple(data.classes[c] for c in range(data.n_classes) if counts[c] == spec.k_per_class)
    test = data.subset(test_idx) if test_idx.size else None
    return Split(data.subset(train_idx), test, empty)


def sample_per_class(data: LabeledDataset, k: int, seed: int, round: int = 0) -> LabeledDataset:
    """Random subsample of ``k`` rows per class (all rows of smaller classes)."""
    rng = np.random.default_rng([seed, round, 1])
    keep = []
    for c in range(data.n_classes):
        members = np.flatnonzero(data.labels == c)
        keep.append(np.sort(rng.permutation(members)[:k]))
    return data.subset(np.concatenate(keep))


def align_classes(data: LabeledDataset, classes: Sequence) -> LabeledDataset:
    """Re-code ``data`` against another class list (must contain all its labels)."""
    if tuple(classes) == data.classes:
        return data
    return LabeledDataset.from_labels(data.features, data.raw_labels(), data.domain_tag, classes=list(classes))
