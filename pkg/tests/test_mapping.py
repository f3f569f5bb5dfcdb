import numpy as np
import pytest
from hypothesis import given, strategies as st

from cdm.dataset import LabeledDataset
from cdm.discriminant import LinearMap
from cdm.errors import ClassMismatchError, DimensionMismatchError, SingularMatrixError
from cdm.mapping import apply_map, fit_q, median_targets, q_objective
from cdm.median import ClusterSummary, LatentEmbedding

from oracles import ridge_gd

# ridge_gd (tests/oracles.py) objective on problem(11), eta = 1
Q_SEED11_OBJECTIVE = 8.039926141808934


def summaries(rng, c, d):
    return [ClusterSummary(k, rng.standard_normal(d), 1.0, 1) for k in range(c)]


def problem(seed, n=5, N=12, c=3, d=2):
    rng = np.random.default_rng(seed)
    labels = np.concatenate([np.arange(c), rng.integers(0, c, N - c)])
    sm = LabeledDataset(rng.standard_normal((N, n)), labels, tuple(range(c)), "sm")
    return sm, summaries(rng, c, d)


def test_basis_inputs_recover_medians(rng):
    s = summaries(rng, 3, 2)
    sm = LabeledDataset(np.eye(3), [0, 1, 2], (0, 1, 2), "sm")
    Q = fit_q(sm, s, eta=0.0)
    np.testing.assert_allclose(Q.matrix, np.column_stack([x.median for x in s]), atol=1e-12)
    assert Q.kind == "ridge_to_medians"


def test_huge_eta_shrinks():
    sm, s = problem(2)
    assert np.linalg.norm(fit_q(sm, s, 1e12).matrix) <= 1e-4 * np.linalg.norm(fit_q(sm, s, 1.0).matrix)


def test_gradient_descent_oracle():
    sm, s = problem(11)
    Y, G = sm.features.T, median_targets(sm.labels, s)
    Q = fit_q(sm, s, 1.0).matrix
    assert q_objective(Q, Y, G, 1.0) == pytest.approx(Q_SEED11_OBJECTIVE, rel=1e-6)
    np.testing.assert_allclose(Q, ridge_gd(Y, G, 1.0), rtol=1e-6, atol=1e-9)


def test_missing_median():
    sm, s = problem(0)
    with pytest.raises(ClassMismatchError):
        fit_q(sm, s[:2])


def test_singular_without_eta():
    sm = LabeledDataset(np.ones((4, 3)), [0, 1, 0, 1], (0, 1), "sm")
    with pytest.raises(SingularMatrixError):
        fit_q(sm, summaries(np.random.default_rng(0), 2, 1), eta=0.0)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 5.0))
def test_duplicating_instances_with_double_eta(seed, eta):
    sm, s = problem(seed)
    doubled = LabeledDataset(np.vstack([sm.features, sm.features]), np.concatenate([sm.labels, sm.labels]),
                             sm.classes, "sm")
    np.testing.assert_allclose(fit_q(doubled, s, 2 * eta).matrix, fit_q(sm, s, eta).matrix, atol=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_objective_probe(seed):
    sm, s = problem(seed)
    Y, G = sm.features.T, median_targets(sm.labels, s)
    Q = fit_q(sm, s).matrix
    best = q_objective(Q, Y, G, 1.0)
    rng = np.random.default_rng(seed)
    assert best <= q_objective(np.zeros_like(Q), Y, G, 1.0)
    for _ in range(100):
        assert best <= q_objective(Q + 1e-3 * rng.standard_normal(Q.shape), Y, G, 1.0)


class TestApplyMap:
    def test_identity(self, rng):
        X = rng.standard_normal((4, 3))
        emb = apply_map(LinearMap.identity(3), LabeledDataset(X, [0, 1, 0, 1], (0, 1), ""))
        np.testing.assert_array_equal(emb.points, X)
        assert emb.labels.tolist() == [0, 1, 0, 1]

    def test_zero(self, rng):
        emb = apply_map(LinearMap(np.zeros((2, 3)), "lda"), LabeledDataset(rng.standard_normal((4, 3)), [0] * 4, (0,), ""))
        assert np.all(emb.points == 0.0)

    def test_composition(self, rng):
        P = LinearMap(rng.standard_normal((3, 6)), "lda")
        H = LinearMap(rng.standard_normal((3, 3)), "lda")
        data = LabeledDataset(rng.standard_normal((10, 6)), [0] * 10, (0,), "")
        np.testing.assert_allclose(apply_map(H, apply_map(P, data)).points, apply_map(H @ P, data).points, atol=1e-10)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatchError):
            apply_map(LinearMap.identity(2), LatentEmbedding(np.zeros((1, 3)), [0]))
