import numpy as np
import pytest
from hypothesis import given, strategies as st

from cdm.errors import ConvergenceError, InsufficientDataError
from cdm.median import (
    ClusterSummary,
    LatentEmbedding,
    cluster_summaries,
    geometric_median,
    median_gap,
    pairwise_disjoint,
    weiszfeld_objective,
)

from oracles import grid_median_1d

EPS = np.finfo(float).eps
# grid search of sum |x - x_i| over [-5, 15] for x in {0, 1, 10}
COLLINEAR_GRID_MINIMIZER = 1.0


def rounding_slack(points, trace):
    """Evaluation noise of the summed distances: one ulp per term."""
    return len(points) * EPS * trace[0]


def test_single_point():
    np.testing.assert_array_equal(geometric_median([[2.0, 7.0]]), [2.0, 7.0])


def test_two_points_midpoint():
    np.testing.assert_array_equal(geometric_median([[0.0, 0.0], [2.0, 4.0]]), [1.0, 2.0])


def test_unit_square():
    m = geometric_median([[0, 0], [1, 0], [0, 1], [1, 1]])
    np.testing.assert_allclose(m, [0.5, 0.5], atol=1e-12)


def test_collinear_grid_oracle():
    assert grid_median_1d([0.0, 1.0, 10.0], -5.0, 15.0) == pytest.approx(COLLINEAR_GRID_MINIMIZER, abs=1e-5)
    m = geometric_median([[0.0, 0.0], [1.0, 0.0], [10.0, 0.0]])
    np.testing.assert_allclose(m, [COLLINEAR_GRID_MINIMIZER, 0.0], atol=1e-6)


def test_even_collinear_lands_in_the_optimal_segment():
    pts = np.array([[0.0], [1.0], [3.0], [7.0]])
    m = geometric_median(pts)
    assert 1.0 - 1e-9 <= m[0] <= 3.0 + 1e-9


def test_duplicate_points_dominating():
    # a point of multiplicity 3 among 5 is the median
    pts = np.array([[1.0, 1.0]] * 3 + [[5.0, 0.0], [0.0, 9.0]])
    np.testing.assert_array_equal(geometric_median(pts), [1.0, 1.0])


def test_iterate_on_data_point_uses_modified_step():
    # the centroid (0, 0) is a data point but not the median
    pts = np.array([[0.0, 0.0], [3.0, 0.0], [-1.0, 2.0], [-2.0, -2.0]])
    info = geometric_median(pts, return_info=True)
    assert median_gap(pts, info.median) <= 1e-6


def test_non_convergence_reports_gap():
    rng = np.random.default_rng(1)
    with pytest.raises(ConvergenceError) as err:
        geometric_median(rng.standard_normal((40, 3)), tol=1e-300, max_iter=1)
    assert err.value.gap is not None and err.value.gap > 0


def test_empty_and_bad_tol():
    with pytest.raises(InsufficientDataError):
        geometric_median(np.empty((0, 2)))
    with pytest.raises(ValueError):
        geometric_median([[0.0]], tol=0.0)


@given(st.integers(1, 50), st.integers(1, 5), st.integers(0, 2**32 - 1), st.booleans())
def test_weiszfeld_monotone_and_optimal(k, d, seed, duplicate):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((k, d)) * rng.uniform(0.1, 10)
    if duplicate and k > 3:
        X[1] = X[0]
    info = geometric_median(X, return_info=True)
    assert np.all(np.diff(info.objective_trace) <= rounding_slack(X, info.objective_trace))
    assert median_gap(X, info.median) <= 1e-6
    assert weiszfeld_objective(X, info.median) <= weiszfeld_objective(X, X.mean(axis=0)) + 1e-12


@given(st.integers(1, 30), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_translation_equivariance(k, d, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((k, d))
    v = rng.uniform(-5, 5, d)
    np.testing.assert_allclose(geometric_median(X + v), geometric_median(X) + v, atol=1e-8)


class TestClusters:
    def test_singleton_radius_zero(self):
        s = cluster_summaries(LatentEmbedding(np.array([[1.0, 2.0]]), [0]))
        assert s[0].radius == 0.0 and s[0].count == 1

    def test_square_radius(self):
        emb = LatentEmbedding(np.array([[0, 0], [1, 0], [0, 1], [1, 1]], float), [0, 0, 0, 0])
        (s,) = cluster_summaries(emb)
        np.testing.assert_allclose(s.median, [0.5, 0.5], atol=1e-12)
        assert s.radius == pytest.approx(np.sqrt(0.5), abs=1e-12)

    def test_two_classes(self, rng):
        emb = LatentEmbedding(rng.standard_normal((6, 2)), [0, 1, 0, 1, 0, 1])
        s = cluster_summaries(emb)
        assert [x.class_id for x in s] == [0, 1]

    def test_empty_class(self):
        with pytest.raises(InsufficientDataError):
            cluster_summaries(LatentEmbedding(np.zeros((2, 1)), [0, 0]), n_classes=2)

    @given(st.integers(1, 15), st.integers(0, 2**32 - 1))
    def test_radius_is_max_member_distance(self, k, seed):
        rng = np.random.default_rng(seed)
        P = rng.standard_normal((k, 3))
        (s,) = cluster_summaries(LatentEmbedding(P, [0] * k))
        assert s.radius == pytest.approx(np.linalg.norm(P - s.median, axis=1).max(), rel=1e-12, abs=1e-15)


def _summary(i, x, r):
    return ClusterSummary(i, np.array([float(x), 0.0]), float(r), 1)


class TestDisjoint:
    def test_margin_one(self):
        flag, M = pairwise_disjoint([_summary(0, 0, 1), _summary(1, 3, 1)])
        assert flag and M[0, 1] == 1.0

    def test_touching_is_not_disjoint(self):
        flag, M = pairwise_disjoint([_summary(0, 0, 1), _summary(1, 2, 1)])
        assert not flag and M[0, 1] == 0.0

    def test_one_overlapping_pair(self):
        flag, M = pairwise_disjoint([_summary(0, 0, 1), _summary(1, 1.5, 1), _summary(2, 10, 1)])
        assert not flag
        off = ~np.eye(3, dtype=bool)
        assert np.count_nonzero(M[off] < 0) == 2  # the (0,1) pair, counted in both triangles
        assert M[0, 1] == -0.5

    def test_needs_two(self):
        with pytest.raises(InsufficientDataError):
            pairwise_disjoint([_summary(0, 0, 1)])

    @given(st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_margins_symmetric(self, c, seed):
        rng = np.random.default_rng(seed)
        s = [ClusterSummary(i, rng.standard_normal(3), float(rng.uniform(0, 2)), 1) for i in range(c)]
        flag, M = pairwise_disjoint(s)
        assert np.array_equal(M, M.T)
        assert np.all(np.diag(M) == 0.0)
        off = ~np.eye(c, dtype=bool)
        assert flag == bool(np.all(M[off] > 0))
