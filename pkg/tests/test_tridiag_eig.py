import math

import numpy as np
import pytest
import scipy.sparse as sps

import tridiag_eig
from errors import InvalidInputError, NotSPDError, NumericalFailureError, OracleTooLargeError
from operators import (DenseOperator, DiagonalOperator, SparseOperator, generate_decay_spectrum,
                       generate_householder_matrix)
from tridiag_eig import (TridiagonalMatrix, block_antidiag_eigen, dense_eigen, exact_logdet,
                         tridiag_eigen)


def random_tridiagonal(rng, size):
    return TridiagonalMatrix(rng.standard_normal(size), np.abs(rng.standard_normal(size - 1)))


class TestTridiagonalMatrix:
    def test_shape_checked(self):
        with pytest.raises(InvalidInputError):
            TridiagonalMatrix([1.0, 2.0], [0.5, 0.5])

    def test_negative_beta_rejected(self):
        with pytest.raises(InvalidInputError):
            TridiagonalMatrix([1.0, 2.0], [-0.5])

    def test_dense_and_leading(self):
        T = TridiagonalMatrix([1.0, 2.0, 3.0], [0.5, 0.25])
        np.testing.assert_array_equal(T.to_dense(), [[1, 0.5, 0], [0.5, 2, 0.25], [0, 0.25, 3]])
        lead = T.leading(2)
        np.testing.assert_array_equal(lead.alphas, [1.0, 2.0])
        np.testing.assert_array_equal(lead.betas, [0.5])


class TestTridiagEigen:
    def test_already_diagonal(self):
        eig = tridiag_eigen(TridiagonalMatrix([3.0, 1.0, 2.0], [0.0, 0.0]))
        np.testing.assert_array_equal(eig.values, [1.0, 2.0, 3.0])
        # e1 is the eigenvector of alpha_1 = 3, the largest value
        np.testing.assert_array_equal(np.abs(eig.first_components), [0.0, 0.0, 1.0])

    def test_two_by_two(self):
        eig = tridiag_eigen(TridiagonalMatrix([1.5, 1.5], [0.5]))
        np.testing.assert_allclose(eig.values, [1.0, 2.0], atol=1e-15)
        np.testing.assert_allclose(eig.first_components ** 2, [0.5, 0.5], atol=1e-15)

    def test_split_blocks(self, rng):
        left, right = random_tridiagonal(rng, 4), random_tridiagonal(rng, 5)
        T = TridiagonalMatrix(np.concatenate([left.alphas, right.alphas]),
                              np.concatenate([left.betas, [0.0], right.betas]))
        expected = np.sort(np.concatenate([np.linalg.eigvalsh(left.to_dense()),
                                           np.linalg.eigvalsh(right.to_dense())]))
        np.testing.assert_allclose(tridiag_eigen(T).values, expected, atol=1e-13)

    def test_single_entry(self):
        eig = tridiag_eigen(TridiagonalMatrix([4.0], []))
        assert eig.values.tolist() == [4.0] and eig.first_components.tolist() == [1.0]

    def test_matches_dense_oracle(self, rng):
        for _ in range(100):
            T = random_tridiagonal(rng, int(rng.integers(1, 51)))
            eig = tridiag_eigen(T)
            values, vectors = dense_eigen(T.to_dense())
            norm = np.linalg.norm(T.to_dense(), 2)
            np.testing.assert_allclose(eig.values, values, atol=1e-12 * norm)
            assert np.sum(eig.first_components ** 2) == pytest.approx(1.0, abs=1e-12)
            assert np.all(np.diff(eig.values) >= 0)

    def test_first_components_match_eigenvectors(self, rng):
        T = random_tridiagonal(rng, 12)
        eig = tridiag_eigen(T)
        _, vectors = np.linalg.eigh(T.to_dense())
        np.testing.assert_allclose(np.abs(eig.first_components), np.abs(vectors[0]), atol=1e-10)

    def test_iteration_cap(self, monkeypatch):
        monkeypatch.setattr(tridiag_eig, 'MAX_QL_ITERATIONS', 0)
        with pytest.raises(NumericalFailureError) as excinfo:
            tridiag_eigen(TridiagonalMatrix([1.0, 2.0, 3.0], [1.0, 1.0]))
        assert excinfo.value.index == 0


class TestDenseEigen:
    def test_identity(self):
        values, Q = dense_eigen(np.eye(3))
        np.testing.assert_array_equal(values, [1.0, 1.0, 1.0])

    def test_householder_spectrum(self):
        values, _ = dense_eigen(generate_householder_matrix([1.0, 2.0]))
        np.testing.assert_allclose(values, [1.0, 2.0], atol=1e-15)

    def test_sorted_output(self):
        values, _ = dense_eigen(DiagonalOperator([3.0, 1.0, 2.0]))
        np.testing.assert_array_equal(values, [1.0, 2.0, 3.0])

    def test_decomposition_quality(self, random_spd):
        A = random_spd(40)
        values, Q = dense_eigen(A)
        norm = np.linalg.norm(A, 2)
        assert np.max(np.abs(A @ Q - Q * values)) <= 1e-10 * norm
        assert np.max(np.abs(Q.T @ Q - np.eye(40))) <= 1e-10

    def test_cap(self):
        with pytest.raises(OracleTooLargeError) as excinfo:
            dense_eigen(DenseOperator(np.eye(5)), cap=4)
        assert (excinfo.value.dim, excinfo.value.cap) == (5, 4)


class TestExactLogdet:
    def test_identity(self):
        assert exact_logdet(DiagonalOperator(np.ones(7))) == 0.0

    def test_harmonic_decay(self):
        expected = math.log(0.99 ** 4 / 24)
        assert exact_logdet(generate_decay_spectrum(4, 1, 0.99)) == pytest.approx(expected, rel=1e-14)

    def test_stored_spectrum_has_no_cap(self):
        assert exact_logdet(generate_decay_spectrum(5000, 0.5, 0.99), cap=10) < 0

    def test_sparse_standin(self, spd_mtx):
        path, S = spd_mtx(30)
        A = SparseOperator(sps.csr_array(S))
        assert exact_logdet(A) == pytest.approx(np.sum(np.log(np.linalg.eigvalsh(S))), rel=1e-12)

    def test_not_spd(self):
        with pytest.raises(NotSPDError):
            exact_logdet(DenseOperator([[1.0, 2.0], [2.0, 1.0]]))


class TestBlockAntidiagEigen:
    def test_exchange_matrix(self):
        np.testing.assert_allclose(block_antidiag_eigen([[1.0]], 0.0), [-1.0, 1.0])

    def test_diagonal_block(self):
        np.testing.assert_allclose(block_antidiag_eigen(np.diag([2.0, 3.0]), 5.0), [2.0, 3.0, 7.0, 8.0])

    def test_zero_block(self):
        np.testing.assert_array_equal(block_antidiag_eigen(np.zeros((2, 3)), 1.0), np.ones(5))

    def test_matches_materialized_matrix(self, rng):
        for trial in range(20):
            rows, cols = int(rng.integers(1, 21)), int(rng.integers(1, 31))
            B = rng.standard_normal((rows, cols))
            if trial % 3 == 0:
                rank = int(rng.integers(0, min(rows, cols) + 1))
                B = rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))
            gamma = float(rng.uniform(-2, 2))
            C = np.block([[gamma * np.eye(rows), B], [B.T, gamma * np.eye(cols)]])
            expected = np.linalg.eigvalsh(C)
            np.testing.assert_allclose(block_antidiag_eigen(B, gamma), expected, atol=1e-10)
