"""
Eigensolvers: symmetric tridiagonal (quadrature nodes and weights),
a dense desk-scale oracle, and the block anti-diagonal decomposition
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from errors import InvalidInputError, NotSPDError, NumericalFailureError, OracleTooLargeError

logger = logging.getLogger(__name__)

MAX_QL_ITERATIONS = 30
RANK_TOL = 1e-12
DEFAULT_ORACLE_CAP = 2000


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Jacobi matrix with diagonal ``alphas`` and off-diagonal ``betas``"""
    alphas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        alphas = np.array(self.alphas, dtype=np.float64).ravel()
        betas = np.array(self.betas, dtype=np.float64).ravel()
        if alphas.size == 0 or betas.size != alphas.size - 1:
            raise InvalidInputError(
                f"tridiagonal needs len(alphas) = len(betas) + 1, got {alphas.size} and {betas.size}")
        if np.any(betas < 0):
            raise InvalidInputError("tridiagonal off-diagonal entries must be nonnegative")
        if not (np.all(np.isfinite(alphas)) and np.all(np.isfinite(betas))):
            raise NumericalFailureError("tridiagonal has non-finite entries")
        alphas.flags.writeable = False
        betas.flags.writeable = False
        object.__setattr__(self, 'alphas', alphas)
        object.__setattr__(self, 'betas', betas)

    @property
    def size(self) -> int:
        return self.alphas.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.alphas) + np.diag(self.betas, 1) + np.diag(self.betas, -1)

    def leading(self, k: int) -> 'TridiagonalMatrix':
        """Leading k x k block"""
        if not 1 <= k <= self.size:
            raise InvalidInputError(f"leading block size must be in [1, {self.size}], got {k}")
        return TridiagonalMatrix(self.alphas[:k], self.betas[:k - 1])

    def norm(self) -> float:
        """Max absolute row sum (bounds the 2-norm)"""
        rows = np.abs(self.alphas).copy()
        rows[:-1] += self.betas
        rows[1:] += self.betas
        return float(rows.max())


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    first_components: np.ndarray


def tridiag_eigen(T: TridiagonalMatrix) -> EigenDecomposition:
    """
    Implicit QL with Wilkinson shifts, tracking only the first row of the
    accumulated rotations

    Args:
        T: symmetric tridiagonal matrix

    Returns:
        Ascending eigenvalues and e1^T y_k for each unit eigenvector y_k

    Raises:
        NumericalFailureError: an eigenvalue did not converge within
            MAX_QL_ITERATIONS sweeps (``index`` names it)
    """
    n = T.size
    d = np.array(T.alphas)
    e = np.zeros(n)
    e[:n - 1] = T.betas
    z = np.zeros(n)
    z[0] = 1.0
    eps = np.finfo(np.float64).eps

    for l in range(n):
        iterations = 0
        while True:
            for mm in range(l, n - 1):
                if abs(e[mm]) <= eps * (abs(d[mm]) + abs(d[mm + 1])):
                    break
            else:
                mm = n - 1
            if mm == l:
                break
            if iterations == MAX_QL_ITERATIONS:
                logger.error(f"QL iteration stalled on eigenvalue {l} of a {n}x{n} tridiagonal")
                raise NumericalFailureError(
                    f"tridiagonal QL failed to converge for eigenvalue {l} after "
                    f"{MAX_QL_ITERATIONS} iterations", index=l)
            iterations += 1

            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[mm] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(mm - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[mm] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[mm] = 0.0

    order = np.argsort(d, kind='stable')
    return EigenDecomposition(values=d[order], first_components=z[order])


def _as_dense(A) -> np.ndarray:
    if hasattr(A, 'to_dense'):
        return A.to_dense(None)
    return np.asarray(A, dtype=np.float64)


def dense_eigen(A, cap: int = DEFAULT_ORACLE_CAP) -> Tuple[np.ndarray, np.ndarray]:
    """
    Full spectral decomposition of a dense symmetric matrix or operator

    Returns:
        (ascending eigenvalues, orthonormal eigenvectors as columns)
    """
    dim = A.dim if hasattr(A, 'dim') else np.shape(A)[0]
    if dim > cap:
        raise OracleTooLargeError(dim, cap)
    matrix = _as_dense(A)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidInputError(f"dense oracle needs a square matrix, got {matrix.shape}")
    values, vectors = np.linalg.eigh(matrix)
    return values, vectors


def exact_logdet(A, cap: int = DEFAULT_ORACLE_CAP) -> float:
    """sum(log(lambda_j)); stored spectra are used directly and have no cap"""
    spectrum = A.known_spectrum() if hasattr(A, 'known_spectrum') else None
    if spectrum is None:
        spectrum, _ = dense_eigen(A, cap)
    if spectrum[0] <= 0:
        raise NotSPDError(f"matrix is not positive definite: smallest eigenvalue {spectrum[0]:.6g}")
    logdet = float(np.sum(np.log(spectrum)))
    logger.debug(f"Exact logdet over {spectrum.size} eigenvalues: {logdet:.12g}")
    return logdet


def block_antidiag_eigen(B, gamma: float) -> np.ndarray:
    """
    Eigenvalues of [[gamma*I_m, B], [B^T, gamma*I_n]] from the singular values of B

    gamma +/- sigma_i for the r numerically nonzero singular values, plus
    gamma repeated m + n - 2r times; returned ascending.
    """
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    rows, cols = B.shape
    sigma = np.linalg.svd(B, compute_uv=False) if B.size else np.zeros(0)
    sigma_max = float(sigma.max()) if sigma.size else 0.0
    sigma = sigma[sigma > RANK_TOL * sigma_max] if sigma_max > 0 else np.zeros(0)
    r = sigma.size
    values = np.concatenate([gamma - sigma, gamma + sigma, np.full(rows + cols - 2 * r, float(gamma))])
    return np.sort(values, kind='stable')
