import numpy as np
import pytest
from hypothesis import given, strategies as st

from cdm.errors import DimensionMismatchError, SingularMatrixError
from cdm.numerics import fix_signs, gen_eig_sym, pairwise_dist, ridge_solve, sym_eig

from oracles import loop_dist, ridge_gd, ridge_objective

# Expected values frozen from the oracles in tests/oracles.py (seeded inputs).
# ridge_gd on default_rng(3): Y 3x8, G 2x8, eta 1
RIDGE_SEED3_OBJECTIVE = 13.15678563976427


class TestSymEig:
    def test_diagonal(self):
        values, vectors = sym_eig(np.diag([1.0, 3.0]))
        np.testing.assert_allclose(values, [3.0, 1.0])
        np.testing.assert_allclose(vectors, [[0, 1], [1, 0]])

    def test_identity(self):
        np.testing.assert_allclose(sym_eig(np.eye(4)).values, np.ones(4))

    def test_random_residual(self, rng):
        A = rng.standard_normal((6, 6))
        A = A + A.T
        values, V = sym_eig(A)
        for lam, v in zip(values, V.T):
            assert np.linalg.norm(A @ v - lam * v) <= 1e-6 * np.linalg.norm(A, 2)
        assert np.all(np.diff(values) <= 0)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            sym_eig(np.array([[np.inf, 0], [0, 1]]))

    @given(st.integers(1, 7), st.integers(0, 2**32 - 1))
    def test_reconstruction_and_orthonormality(self, n, seed):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((n, n))
        A = A + A.T
        values, V = sym_eig(A)
        scale = max(np.linalg.norm(A, 2), 1e-300)
        np.testing.assert_allclose(V @ np.diag(values) @ V.T, A, atol=1e-6 * scale)
        np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-6)

    def test_sign_convention(self):
        V = fix_signs(np.array([[-1.0, 0.0], [0.0, -2.0]]))
        assert V[0, 0] == 1.0 and V[1, 1] == 2.0


class TestGenEig:
    def test_identity_metric(self, rng):
        A = rng.standard_normal((4, 4))
        A = A + A.T
        np.testing.assert_allclose(gen_eig_sym(A, np.eye(4)).values, sym_eig(A).values, atol=1e-12)

    def test_proportional(self, rng):
        R = rng.standard_normal((5, 5))
        B = R @ R.T + 5 * np.eye(5)
        np.testing.assert_allclose(gen_eig_sym(2 * B, B).values, 2.0, atol=1e-10)

    def test_random_spd_residual(self, rng):
        A = rng.standard_normal((5, 5))
        A = A + A.T
        R = rng.standard_normal((5, 5))
        B = R @ R.T + np.eye(5)
        values, V = gen_eig_sym(A, B)
        for lam, v in zip(values, V.T):
            assert np.linalg.norm(A @ v - lam * B @ v) <= 1e-6 * np.linalg.norm(A, 2) * np.linalg.norm(v)

    def test_not_positive_definite(self):
        with pytest.raises(SingularMatrixError):
            gen_eig_sym(np.eye(2), np.diag([1.0, -1.0]))


class TestRidge:
    def test_identity_inputs(self, rng):
        G = rng.standard_normal((2, 4))
        np.testing.assert_allclose(ridge_solve(np.eye(4), G, 0.0), G, atol=1e-12)

    def test_huge_eta(self, rng):
        M = ridge_solve(rng.standard_normal((3, 8)), rng.standard_normal((2, 8)), 1e12)
        assert np.linalg.norm(M) < 1e-9

    def test_gradient_descent_oracle(self):
        rng = np.random.default_rng(3)
        Y, G = rng.standard_normal((3, 8)), rng.standard_normal((2, 8))
        M = ridge_solve(Y, G, 1.0)
        assert ridge_objective(M, Y, G, 1.0) == pytest.approx(RIDGE_SEED3_OBJECTIVE, rel=1e-6)
        np.testing.assert_allclose(M, ridge_gd(Y, G, 1.0), rtol=1e-6, atol=1e-9)

    def test_dual_form_matches_primal(self, rng):
        # n > N takes the kernel form
        Y, G = rng.standard_normal((12, 5)), rng.standard_normal((2, 5))
        M = ridge_solve(Y, G, 0.5)
        primal = G @ Y.T @ np.linalg.inv(Y @ Y.T + 0.5 * np.eye(12))
        np.testing.assert_allclose(M, primal, atol=1e-10)

    def test_singular_without_regularizer(self):
        Y = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
        with pytest.raises(SingularMatrixError):
            ridge_solve(Y, np.ones((1, 3)), 0.0)

    def test_negative_eta(self):
        with pytest.raises(ValueError):
            ridge_solve(np.eye(2), np.eye(2), -1.0)

    @given(st.integers(1, 6), st.integers(1, 10), st.integers(1, 3), st.floats(0.01, 10), st.integers(0, 2**32 - 1))
    def test_local_optimality_probe(self, n, N, d, eta, seed):
        rng = np.random.default_rng(seed)
        Y, G = rng.standard_normal((n, N)), rng.standard_normal((d, N))
        M = ridge_solve(Y, G, eta)
        best = ridge_objective(M, Y, G, eta)
        assert best <= ridge_objective(np.zeros_like(M), Y, G, eta) + 1e-9
        for _ in range(100):
            P = M + 1e-3 * rng.standard_normal(M.shape)
            assert best <= ridge_objective(P, Y, G, eta) + 1e-12 * max(1.0, best)


class TestPairwiseDist:
    def test_self(self):
        np.testing.assert_array_equal(pairwise_dist([[1.0, 2.0]], [[1.0, 2.0]]), [[0.0]])

    def test_345(self):
        assert pairwise_dist([[0.0, 0.0]], [[3.0, 4.0]])[0, 0] == 5.0

    def test_loop_oracle_exact(self, rng):
        A, B = rng.standard_normal((4, 3)), rng.standard_normal((5, 3))
        assert np.array_equal(pairwise_dist(A, B), loop_dist(A, B))

    def test_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            pairwise_dist(np.ones((2, 3)), np.ones((2, 4)))

    @given(st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_triangle_inequality(self, d, seed):
        rng = np.random.default_rng(seed)
        P = rng.standard_normal((6, d)) * 10
        D = pairwise_dist(P, P)
        assert np.all(D >= 0)
        assert np.all(np.diag(D) == 0)
        assert np.all(D[:, :, None] <= D[:, None, :] + D.T[None, :, :] + 1e-9)
