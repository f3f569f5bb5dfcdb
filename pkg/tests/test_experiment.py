import json

import numpy as np
import pytest

from cdm.dataset import write_dense_csv
from cdm.errors import ConfigError, InsufficientDataError
from cdm.experiment import (
    load_config,
    normalize_config,
    payload_bytes,
    read_report,
    run_experiment,
    worker_count,
    write_report,
    write_rounds_csv,
)
from cdm.synth import SynthParams, generate


@pytest.fixture(scope="module")
def data():
    return generate(SynthParams(seed=1, test_per_class=30))


def test_counts_and_summary(data):
    rep = run_experiment({"rounds": 4}, *data)
    p = rep["payload"]
    assert len(p["rounds"]) == 4
    assert len(p["cdm"]["accuracies"]) == len(p["baseline"]["accuracies"]) == 4
    acc = np.array(p["cdm"]["accuracies"])
    assert p["cdm"]["mean"] == pytest.approx(acc.mean())
    assert p["cdm"]["std"] == pytest.approx(acc.std(ddof=1))
    assert [r["round"] for r in p["rounds"]] == [0, 1, 2, 3]
    assert all(r["n_train"] == 9 for r in p["rounds"])


def test_single_round_std_is_none(data):
    assert run_experiment({"rounds": 1}, *data)["payload"]["cdm"]["std"] is None


def test_deterministic_and_thread_independent(data):
    a = run_experiment({"rounds": 3, "seed": 9}, *data)
    b = run_experiment({"rounds": 3, "seed": 9, "workers": 3}, *data)
    assert payload_bytes(a) == payload_bytes(b)
    c = run_experiment({"rounds": 3, "seed": 10}, *data)
    assert payload_bytes(a) != payload_bytes(c)


def test_report_round_trip(data, tmp_path):
    rep = run_experiment({"rounds": 2, "diagnostics": False}, *data)
    write_report(rep, tmp_path / "r.json")
    back = read_report(tmp_path / "r.json")
    assert payload_bytes(back) == payload_bytes(rep)
    write_rounds_csv(rep, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("round,")


def test_read_report_rejects_other_files(tmp_path):
    (tmp_path / "x.json").write_text(json.dumps({"format": "cdm-model", "version": 1}))
    with pytest.raises(ConfigError):
        read_report(tmp_path / "x.json")


@pytest.mark.parametrize("raw", [{"bogus": 1}, {"rounds": 0}, {"k_per_class": 1.5}, {"classifier": "tree"},
                                 {"pca_energy": 1.5}, {"p_approach": "pca"}, {"baseline_features": "x"},
                                 {"knn_k": 0}, {"rounds": True}])
def test_invalid_config(raw):
    with pytest.raises(ConfigError):
        normalize_config(raw)


def test_load_config(tmp_path):
    (tmp_path / "c.json").write_text('{"rounds": 2}')
    assert load_config(tmp_path / "c.json") == {"rounds": 2}
    (tmp_path / "bad.json").write_text("[1]")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.json")


def test_from_files_with_pca(data, tmp_path):
    write_dense_csv(data[0], tmp_path / "ltm.csv")
    write_dense_csv(data[1], tmp_path / "sm.csv")
    rep = run_experiment({"ltm_path": str(tmp_path / "ltm.csv"), "sm_path": str(tmp_path / "sm.csv"),
                          "rounds": 2, "pca_energy": 0.9, "baseline_features": "pca", "ltm_per_class": 20})
    p = rep["payload"]
    assert p["ltm"]["dim"] < 40 and p["sm"]["dim"] < 25
    assert all(r["n_ltm"] == 60 for r in p["rounds"])


def test_no_test_rows(data):
    ltm, sm = generate(SynthParams(test_per_class=0))
    with pytest.raises(InsufficientDataError):
        run_experiment({"rounds": 1}, ltm, sm)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("CDM_NUM_THREADS", "4")
    assert worker_count({"workers": None}) == 4
    assert worker_count({"workers": 2}) == 2
    monkeypatch.delenv("CDM_NUM_THREADS")
    assert worker_count({"workers": None}) == 1
