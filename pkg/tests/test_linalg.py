import numpy as np
import pytest
from numpy.testing import assert_allclose

from phpencil.linalg import (
    Inertia,
    SingularMatrixError,
    frobenius_list,
    herm_skew_split,
    inertia,
    kron,
    polar_factor,
    smallest_singular_triple,
    solve_dense,
    unvec,
    vec,
)

from conftest import crandn


class TestVec:
    def test_column_stacking(self):
        assert_allclose(vec([[1, 2], [3, 4]]), [1, 3, 2, 4])

    def test_zero_matrix(self):
        assert_allclose(vec(np.zeros((2, 2))), np.zeros(4))

    def test_norm_equals_frobenius(self, rng):
        m = crandn(rng, 3, 2)
        assert abs(np.linalg.norm(vec(m)) - np.linalg.norm(m)) < 1e-15

    def test_unvec_roundtrip(self, rng):
        m = crandn(rng, 4, 3)
        assert np.array_equal(unvec(vec(m), 4, 3), m)


class TestKron:
    def test_identity(self):
        assert_allclose(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_scalar_factor(self):
        m = np.array([[0, 1], [0, 0]])
        assert_allclose(kron(m, np.eye(1)), m)

    def test_vec_identity(self, rng):
        # vec(B X A^T) = kron(A, B) vec(X), checked by direct multiplication
        for _ in range(10):
            a = crandn(rng, 2, 2)
            b = crandn(rng, 2, 2)
            x = crandn(rng, 2, 2)
            lhs = vec(b @ x @ a.T)
            rhs = kron(a, b) @ vec(x)
            assert np.linalg.norm(lhs - rhs) < 1e-14

    def test_vec_identity_rect_sizes(self, rng):
        for ra, ca, rb, cb in [(3, 2, 2, 4), (4, 4, 3, 3)]:
            a = crandn(rng, ra, ca)
            b = crandn(rng, rb, cb)
            x = crandn(rng, cb, ca)
            assert np.linalg.norm(vec(b @ x @ a.T) - kron(a, b) @ vec(x)) < 1e-13


class TestHermSkewSplit:
    def test_hermitian_input(self, rng):
        y = crandn(rng, 3, 3)
        y = y + y.conj().T
        w, v = herm_skew_split(y)
        assert_allclose(w, y)
        assert np.linalg.norm(v) < 1e-15 * np.linalg.norm(y)

    def test_skew_input(self, rng):
        y = crandn(rng, 3, 3)
        y = y - y.conj().T
        w, v = herm_skew_split(y)
        assert np.linalg.norm(w) < 1e-15 * np.linalg.norm(y)
        assert_allclose(v, y)

    def test_worked_example(self):
        y = np.array([[1, 2 + 1j], [0, 3]])
        w, v = herm_skew_split(y)
        assert_allclose(w, [[1, 1 + 0.5j], [1 - 0.5j, 3]])
        assert np.array_equal(v, y - w)

    def test_reconstruction_at_ulp_level(self, rng):
        # forming V as Y - W makes W + V reproduce Y up to one rounding per
        # entry; the error is bounded by ulps of the larger split magnitude
        y = crandn(rng, 5, 5)
        w, v = herm_skew_split(y)
        eps = np.finfo(float).eps
        bound = 4 * eps * np.maximum(np.abs(w) + np.abs(v), np.abs(y))
        assert np.all(np.abs((w + v) - y) <= bound)

    def test_reconstruction_bit_exact_when_balanced(self):
        # same-magnitude entries subtract exactly (Sterbenz), so the
        # round trip is bitwise for this matrix
        y = np.array([[1.0 + 1.0j, 1.25 - 0.5j], [-0.75 + 0.25j, -2.0 - 1.0j]])
        w, v = herm_skew_split(y)
        assert np.array_equal(w + v, y)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            herm_skew_split(np.ones((2, 3)))


class TestInertia:
    def test_diagonal(self):
        assert inertia(np.diag([1.0, -1.0, 0.0])).astuple() == (1, 1, 1)

    def test_identity(self):
        assert inertia(np.eye(3)).astuple() == (3, 0, 0)

    def test_pauli_like(self):
        # eigenvalues of [[0, i], [-i, 0]] are +/-1 by the characteristic polynomial
        h = np.array([[0, 1j], [-1j, 0]])
        assert inertia(h).astuple() == (1, 1, 0)

    def test_rejects_non_hermitian(self, rng):
        with pytest.raises(ValueError):
            inertia(crandn(rng, 3, 3))

    def test_sylvester_law_of_inertia(self, rng):
        # congruence with nonsingular S preserves inertia
        for _ in range(10):
            h = crandn(rng, 5, 5)
            h = (h + h.conj().T) / 2
            s = crandn(rng, 5, 5) + 2 * np.eye(5)
            assert inertia(s.conj().T @ h @ s, tol=1e-9).astuple() == inertia(h).astuple()

    def test_order_invariant(self):
        res = inertia(np.diag([2.0, -3.0, 0.0, 1.0]))
        assert res.order == 4
        assert isinstance(res, Inertia)


class TestSmallestSingularTriple:
    def test_identity(self):
        t = smallest_singular_triple(np.eye(3))
        assert abs(t.sigma - 1.0) < 1e-14

    def test_diagonal(self):
        t = smallest_singular_triple(np.diag([3.0, 0.5]))
        assert abs(t.sigma - 0.5) < 1e-14
        assert_allclose(np.abs(t.v), [0, 1], atol=1e-14)

    def test_sqrt_two_case(self):
        # M^T M = 2 I, so both singular values are sqrt(2)
        m = np.array([[1.0, -1.0], [-1.0, -1.0]])
        t = smallest_singular_triple(m)
        assert abs(t.sigma - np.sqrt(2)) < 1e-14

    def test_triple_relation_and_normalization(self, rng):
        for rows, cols in [(4, 4), (5, 3), (3, 5)]:
            m = crandn(rng, rows, cols)
            t = smallest_singular_triple(m)
            assert abs(np.linalg.norm(t.u) - 1) < 1e-13
            assert abs(np.linalg.norm(t.v) - 1) < 1e-13
            assert np.linalg.norm(m @ t.v - t.sigma * t.u) < 1e-12 * np.linalg.norm(m, 2)


class TestPolarFactor:
    def test_scaled_identity(self):
        f = polar_factor(2 * np.eye(2))
        assert_allclose(f.unitary, np.eye(2), atol=1e-14)
        assert_allclose(f.hermitian, 2 * np.eye(2), atol=1e-14)

    def test_rotation_times_two(self):
        # SVD oracle: M = [[0,-2],[2,0]] has M^H M = 4 I, so hermitian = 2I
        m = np.array([[0.0, -2.0], [2.0, 0.0]])
        f = polar_factor(m)
        assert_allclose(f.unitary, [[0, -1], [1, 0]], atol=1e-14)
        assert_allclose(f.hermitian, 2 * np.eye(2), atol=1e-14)

    def test_hpd_input_is_its_own_hermitian_factor(self, rng):
        a = crandn(rng, 4, 4)
        m = a @ a.conj().T + np.eye(4)
        f = polar_factor(m)
        assert_allclose(f.unitary, np.eye(4), atol=1e-12)
        assert_allclose(f.hermitian, m, atol=1e-12 * np.linalg.norm(m))

    def test_invariants_on_random_matrices(self, rng):
        for _ in range(100):
            m = crandn(rng, 6, 6) + 0.5 * np.eye(6)
            f = polar_factor(m)
            assert np.linalg.norm(f.unitary.conj().T @ f.unitary - np.eye(6)) < 1e-12
            herm_defect = np.linalg.norm(f.hermitian - f.hermitian.conj().T)
            assert herm_defect < 1e-12 * np.linalg.norm(f.hermitian)
            assert np.min(np.linalg.eigvalsh((f.hermitian + f.hermitian.conj().T) / 2)) > -1e-12
            recon = np.linalg.norm(f.unitary @ f.hermitian - m)
            assert recon < 1e-12 * np.linalg.norm(m)

    def test_singular_input_raises(self):
        with pytest.raises(SingularMatrixError):
            polar_factor(np.diag([1.0, 0.0]))


class TestFrobeniusList:
    def test_two_identities(self):
        assert abs(frobenius_list([np.eye(2), np.eye(2)]) - 2.0) < 1e-15

    def test_empty(self):
        assert frobenius_list([]) == 0.0

    def test_scalar(self):
        assert abs(frobenius_list([np.array([[3.0]])]) - 3.0) < 1e-15


class TestSolveDense:
    def test_identity(self, rng):
        b = crandn(rng, 4, 1).ravel()
        assert_allclose(solve_dense(np.eye(4), b), b)

    def test_diagonal(self):
        x = solve_dense(np.diag([2.0, 4.0]), np.array([2.0, 4.0]))
        assert_allclose(x, [1.0, 1.0])

    def test_residual_well_conditioned(self, rng):
        a = crandn(rng, 5, 5) + 3 * np.eye(5)
        b = crandn(rng, 5, 1).ravel()
        x = solve_dense(a, b)
        assert np.linalg.norm(a @ x - b) < 1e-12 * np.linalg.norm(a, 2) * np.linalg.norm(x)

    def test_matrix_rhs(self, rng):
        a = crandn(rng, 4, 4) + 3 * np.eye(4)
        b = crandn(rng, 4, 2)
        x = solve_dense(a, b)
        assert x.shape == (4, 2)
        assert np.linalg.norm(a @ x - b) < 1e-12 * np.linalg.norm(a) * np.linalg.norm(x)

    def test_singular_raises_with_condition(self):
        with pytest.raises(SingularMatrixError):
            solve_dense(np.diag([1.0, 0.0]), np.ones(2))


class TestValidation:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            vec([[np.nan, 1.0]])

    def test_rejects_inf(self):
        with pytest.raises(ValueError):
            polar_factor([[np.inf, 0.0], [0.0, 1.0]])
