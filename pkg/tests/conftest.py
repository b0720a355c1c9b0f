import numpy as np
import pytest
import scipy.sparse as sps

from matrix_market import write_matrix_market


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_spd(rng):
    """Dense SPD matrix with eigenvalues in [0.5, 1.5]"""
    def make(n, low=0.5, high=1.5):
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        A = (Q * rng.uniform(low, high, size=n)) @ Q.T
        return 0.5 * (A + A.T)
    return make


@pytest.fixture
def spd_mtx(tmp_path, rng):
    """Small diagonally dominant sparse SPD matrix written as Matrix Market"""
    def make(n=12, name='standin.mtx'):
        B = sps.random(n, n, density=0.3, random_state=np.random.RandomState(7))
        S = (B + B.T).toarray()
        S += np.diag(np.abs(S).sum(axis=1) + 1.0)
        path = tmp_path / name
        write_matrix_market(S, path, comment='diagonally dominant test matrix')
        return path, S
    return make
