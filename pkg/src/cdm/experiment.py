"""Repeated few-shot experiments: sample SM training rows, fit CDM, score against a baseline."""

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cdm.classify import ClassifierSpec, accuracy
from cdm.dataset import (
    LabeledDataset,
    SplitSpec,
    load_dense_csv,
    load_sparse_libsvm,
    pca_apply,
    pca_fit,
    sample_per_class,
    sample_split,
)
from cdm.errors import ConfigError, InsufficientDataError
from cdm.pipeline import CdmConfig, baseline_predict, cdm_fit, cdm_predict, hypothesis_check

REPORT_FORMAT = "cdm-report"
REPORT_VERSION = 1

# every accepted key with its default; None marks "unset"
DEFAULTS = {
    "ltm_path": None,
    "sm_path": None,
    "ltm_format": None,
    "sm_format": None,
    "label_column": "label",
    "ltm_dim": None,
    "sm_dim": None,
    "p_approach": "lda",
    "latent_dim": "auto",
    "eta": 1.0,
    "use_augmentation": False,
    "block_rescale": False,
    "standardize": True,
    "sm_bias": False,
    "classifier": "knn",
    "knn_k": 5,
    "svm_c": 1.0,
    "svm_gamma": "auto",
    "svm_tol": 1e-3,
    "k_per_class": 3,
    "ltm_per_class": None,
    "rounds": 10,
    "seed": 0,
    "pca_energy": None,
    "baseline_features": "raw",
    "diagnostics": True,
    "output": None,
    "csv_output": None,
    "workers": None,
}


def normalize_config(raw) -> dict:
    """Merge ``raw`` over the defaults, rejecting unknown keys and bad values."""
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg = {**DEFAULTS, **raw}
    for key in ("k_per_class", "rounds", "seed", "knn_k"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool) or cfg[key] < 0:
            raise ConfigError(f"{key} must be a nonnegative integer")
    if cfg["k_per_class"] < 1 or cfg["rounds"] < 1:
        raise ConfigError("k_per_class and rounds must be positive")
    if cfg["classifier"] not in ("knn", "svm_rbf"):
        raise ConfigError("classifier must be 'knn' or 'svm_rbf'")
    if cfg["baseline_features"] not in ("raw", "pca"):
        raise ConfigError("baseline_features must be 'raw' or 'pca'")
    if cfg["pca_energy"] is not None and not 0 < cfg["pca_energy"] <= 1:
        raise ConfigError("pca_energy must lie in (0, 1]")
    cdm_config(cfg)  # validates the CDM part
    return cfg


def cdm_config(cfg) -> CdmConfig:
    try:
        clf = ClassifierSpec(cfg["classifier"], cfg["knn_k"], cfg["svm_c"], cfg["svm_gamma"], cfg["svm_tol"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return CdmConfig(
        p_approach=cfg["p_approach"],
        latent_dim=cfg["latent_dim"],
        eta=float(cfg["eta"]),
        use_augmentation=bool(cfg["use_augmentation"]),
        classifier=clf,
        block_rescale=bool(cfg["block_rescale"]),
        standardize=bool(cfg["standardize"]),
        sm_bias=bool(cfg["sm_bias"]),
    )


def load_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a flat JSON object")
    return raw


def infer_format(path, fmt):
    if fmt:
        if fmt not in ("csv", "libsvm"):
            raise ConfigError(f"unknown data format {fmt!r}")
        return fmt
    return "csv" if str(path).lower().endswith(".csv") else "libsvm"


def load_data(path, fmt=None, label_column="label", dim=None, tag=None) -> LabeledDataset:
    if path is None:
        raise ConfigError("data path is not set")
    if infer_format(path, fmt) == "csv":
        return load_dense_csv(path, label_column, domain_tag=tag)
    if dim is None:
        raise ConfigError(f"{path}: sparse input needs its dimension (ltm_dim / sm_dim)")
    return load_sparse_libsvm(path, int(dim), domain_tag=tag)


@dataclass(frozen=True)
class Prepared:
    ltm: LabeledDataset
    sm: LabeledDataset
    sm_baseline: LabeledDataset


def prepare(cfg, ltm: LabeledDataset, sm: LabeledDataset) -> Prepared:
    """Optional per-domain PCA, each domain fit on its own instances."""
    sm_raw = sm
    if cfg["pca_energy"] is not None:
        ltm = pca_apply(pca_fit(ltm, cfg["pca_energy"]), ltm)
        sm = pca_apply(pca_fit(sm, cfg["pca_energy"]), sm)
    baseline = sm if cfg["baseline_features"] == "pca" else sm_raw
    return Prepared(ltm, sm, baseline)


def _summary(values):
    pct = [100.0 * v for v in values]
    std = float(np.std(pct, ddof=1)) if len(pct) > 1 else None
    return {"accuracies": pct, "mean": float(np.mean(pct)), "std": std}


def run_round(cfg, data: Prepared, r: int):
    t0 = time.perf_counter()
    spec = SplitSpec(cfg["k_per_class"], cfg["seed"], cfg["rounds"])
    train, test, empty = sample_split(data.sm, spec, r)
    if test is None:
        raise InsufficientDataError("no SM instances left for testing")
    ltm = data.ltm
    if cfg["ltm_per_class"] is not None:
        ltm = sample_per_class(ltm, cfg["ltm_per_class"], cfg["seed"], r)
    config = cdm_config(cfg)
    model = cdm_fit(ltm, train, config)
    cdm_acc = accuracy(cdm_predict(model, ltm, train, test), test.labels)
    # same rows, baseline feature space
    b_train, b_test, _ = sample_split(data.sm_baseline, spec, r)
    base_acc = accuracy(baseline_predict(b_train, b_test, config.classifier), b_test.labels)
    row = {
        "round": r,
        "n_ltm": ltm.n_instances,
        "n_train": train.n_instances,
        "n_test": test.n_instances,
        "empty_test_classes": list(empty),
        "cdm_accuracy": 100.0 * cdm_acc,
        "baseline_accuracy": 100.0 * base_acc,
    }
    if cfg["diagnostics"]:
        row["diagnostics"] = hypothesis_check(model, ltm, train, test).to_dict()
    return row, time.perf_counter() - t0


def worker_count(cfg):
    if cfg.get("workers") is not None:
        return max(1, int(cfg["workers"]))
    env = os.environ.get("CDM_NUM_THREADS")
    return max(1, int(env)) if env else 1


def run_experiment(raw_config, ltm=None, sm=None) -> dict:
    """Run every round and return the report document.

    ``ltm``/``sm`` may be passed directly; otherwise they are loaded from
    the configured paths. The ``payload`` part of the report depends only
    on the data and config; wall-clock times live under ``timing``.
    """
    t0 = time.perf_counter()
    cfg = normalize_config(raw_config)
    if ltm is None:
        ltm = load_data(cfg["ltm_path"], cfg["ltm_format"], cfg["label_column"], cfg["ltm_dim"], "ltm")
    if sm is None:
        sm = load_data(cfg["sm_path"], cfg["sm_format"], cfg["label_column"], cfg["sm_dim"], "sm")
    data = prepare(cfg, ltm, sm)
    rounds = range(cfg["rounds"])
    workers = worker_count(cfg)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: run_round(cfg, data, r), rounds))
    else:
        results = [run_round(cfg, data, r) for r in rounds]
    rows = [row for row, _ in results]
    echo = {k: v for k, v in cfg.items() if k not in ("output", "csv_output", "workers")}
    payload = {
        "config": echo,
        "ltm": {"n_instances": data.ltm.n_instances, "dim": data.ltm.dim, "classes": list(data.ltm.classes)},
        "sm": {"n_instances": data.sm.n_instances, "dim": data.sm.dim, "classes": list(data.sm.classes)},
        "rounds": rows,
        "cdm": _summary([row["cdm_accuracy"] / 100.0 for row in rows]),
        "baseline": _summary([row["baseline_accuracy"] / 100.0 for row in rows]),
    }
    return {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "payload": payload,
        "timing": {"wall_time_s": time.perf_counter() - t0, "round_times_s": [t for _, t in results]},
    }


def payload_bytes(report) -> bytes:
    """Canonical serialization of the reproducible part of a report."""
    return json.dumps(report["payload"], sort_keys=True, allow_nan=False).encode("utf-8")


def write_report(report, path):
    Path(path).write_text(json.dumps(report, indent=1, allow_nan=False) + "\n", encoding="utf-8")


def read_report(path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or doc.get("format") != REPORT_FORMAT or doc.get("version") != REPORT_VERSION:
        raise ConfigError(f"{path}: not a CDM report")
    for key in ("payload", "timing"):
        if key not in doc:
            raise ConfigError(f"{path}: report lacks {key!r}")
    rounds = doc["payload"]["rounds"]
    if len(rounds) != doc["payload"]["config"]["rounds"]:
        raise ConfigError(f"{path}: round count does not match config")
    return doc


def write_rounds_csv(report, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["round", "cdm_accuracy", "baseline_accuracy", "n_train", "n_test"])
        for row in report["payload"]["rounds"]:
            w.writerow([row["round"], repr(row["cdm_accuracy"]), repr(row["baseline_accuracy"]), row["n_train"], row["n_test"]])

