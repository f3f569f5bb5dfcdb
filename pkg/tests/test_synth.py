import numpy as np
import pytest

from cdm.dataset import load_dense_csv, write_dense_csv
from cdm.discriminant import fit_p_graph_embedding
from cdm.mapping import apply_map
from cdm.median import cluster_summaries
from cdm.synth import SynthParams, generate, random_map


def test_defaults_shapes():
    ltm, sm = generate()
    assert ltm.features.shape == (150, 40)
    assert sm.features.shape == (3 * 103, 25)
    assert ltm.classes == sm.classes == (0, 1, 2)


def test_seed_reproducible():
    a, b = generate(SynthParams(seed=5)), generate(SynthParams(seed=5))
    assert a[0].features.tobytes() == b[0].features.tobytes()
    assert a[1].features.tobytes() != generate(SynthParams(seed=6))[1].features.tobytes()


def test_noiseless_clusters_have_zero_radius():
    ltm, _ = generate(SynthParams(noise=0.0))
    for c in range(3):
        rows = ltm.features[ltm.labels == c]
        assert np.all(rows == rows[0])
    emb = apply_map(fit_p_graph_embedding(ltm, 2), ltm)
    assert all(s.radius == pytest.approx(0.0, abs=1e-9) for s in cluster_summaries(emb))


def test_files_round_trip(tmp_path):
    ltm, sm = generate()
    write_dense_csv(ltm, tmp_path / "ltm.csv")
    write_dense_csv(sm, tmp_path / "sm.csv")
    a, b = load_dense_csv(tmp_path / "ltm.csv"), load_dense_csv(tmp_path / "sm.csv")
    assert a.classes == b.classes == (0, 1, 2)
    assert a.features.tobytes() == ltm.features.tobytes()


def test_map_gains(rng):
    M = random_map(rng, 10, 4, 30.0)
    np.testing.assert_allclose(np.linalg.norm(M, axis=0), np.geomspace(1, 30, 4))
    assert np.linalg.matrix_rank(M) == 4


@pytest.mark.parametrize("kw", [{"n_classes": 1}, {"latent_dim": 1}, {"sm_dim": 3}, {"noise": -1.0},
                                {"condition": 0.5}, {"sm_per_class": 0}])
def test_infeasible(kw):
    with pytest.raises(ValueError):
        SynthParams(**kw)
