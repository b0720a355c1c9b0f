"""
Lanczos tridiagonalization and the Gauss quadrature rule it induces
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from errors import NumericalFailureError, PreconditionError
from tridiag_eig import TridiagonalMatrix, tridiag_eigen

logger = logging.getLogger(__name__)

DEFAULT_BREAKDOWN_TOL = 1e-12
UNIT_TOL = 1e-12
REORTH_PASSES = 2


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss nodes (ascending) and weights"""
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.nodes.size


@dataclass
class LanczosResult:
    tridiagonal: TridiagonalMatrix
    rule: QuadratureRule
    steps_completed: int
    breakdown: bool
    mvm_count: int
    V: Optional[np.ndarray] = None


def quadrature_from_tridiagonal(T: TridiagonalMatrix) -> QuadratureRule:
    """Nodes are the eigenvalues of T, weights the squared first components"""
    eig = tridiag_eigen(T)
    return QuadratureRule(nodes=eig.values, weights=eig.first_components ** 2)


def _check_request(A, m: int, v: np.ndarray) -> None:
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 0:
        raise PreconditionError(f"Lanczos step count must be a nonnegative integer, got {m!r}")
    if m >= A.dim:
        raise PreconditionError(f"Lanczos step count m={m} must be smaller than dim={A.dim}")
    if v.shape[0] != A.dim:
        raise PreconditionError(f"start vector has length {v.shape[0]}, operator has dim {A.dim}")


def _breakdown_threshold(A, breakdown_tol: float) -> float:
    return breakdown_tol * max(A.norm_estimate(), np.finfo(np.float64).tiny)


def lanczos(A, v: np.ndarray, m: int, reorthogonalize: bool = True,
            breakdown_tol: float = DEFAULT_BREAKDOWN_TOL, keep_basis: bool = False) -> LanczosResult:
    """
    Run m Lanczos steps from the unit vector v

    Produces the (m+1) x (m+1) Jacobi matrix, or its leading block when
    some beta falls below ``breakdown_tol`` times the norm estimate of A.
    One matvec is spent per basis vector.

    Args:
        A: symmetric operator exposing ``dim``, ``matvec`` and ``norm_estimate``
        v: start vector with unit 2-norm
        m: number of steps, 0 <= m < dim
        reorthogonalize: full reorthogonalization against the stored basis
        breakdown_tol: relative breakdown threshold
        keep_basis: return the Krylov basis in ``V``

    Raises:
        PreconditionError: m out of range or v not a unit vector
        NumericalFailureError: a non-finite value appeared
    """
    v = np.asarray(v, dtype=np.float64)
    _check_request(A, m, v)
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        raise PreconditionError(f"start vector must have unit norm, got {np.linalg.norm(v):.17g}")

    tol = _breakdown_threshold(A, breakdown_tol)
    V = np.zeros((A.dim, m + 1))
    V[:, 0] = v
    alphas: List[float] = []
    betas: List[float] = []
    breakdown = False

    for k in range(m + 1):
        w = A.matvec(V[:, k])
        alpha = float(V[:, k] @ w)
        if not np.isfinite(alpha):
            raise NumericalFailureError(f"non-finite alpha at Lanczos step {k}", index=k)
        alphas.append(alpha)
        if k == m:
            break

        w = w - alpha * V[:, k]
        if k > 0:
            w -= betas[-1] * V[:, k - 1]
        if reorthogonalize:
            basis = V[:, :k + 1]
            for _ in range(REORTH_PASSES):
                w -= basis @ (basis.T @ w)

        beta = float(np.linalg.norm(w))
        if not np.isfinite(beta):
            raise NumericalFailureError(f"non-finite beta at Lanczos step {k}", index=k)
        if beta <= tol:
            breakdown = True
            logger.debug(f"Lanczos breakdown after {k + 1} basis vectors (beta={beta:.3e})")
            break
        betas.append(beta)
        V[:, k + 1] = w / beta

    steps = len(alphas) - 1
    T = TridiagonalMatrix(np.asarray(alphas), np.asarray(betas))
    return LanczosResult(tridiagonal=T,
                         rule=quadrature_from_tridiagonal(T),
                         steps_completed=steps,
                         breakdown=breakdown,
                         mvm_count=steps + 1,
                         V=V[:, :steps + 1] if keep_basis else None)


def _rules_by_size(alphas: np.ndarray, betas: np.ndarray, steps: np.ndarray) -> Dict[int, QuadratureRule]:
    """Eigen-decompose all Jacobi matrices of equal size at once"""
    rules: Dict[int, QuadratureRule] = {}
    for s in np.unique(steps):
        cols = np.flatnonzero(steps == s)
        size = int(s) + 1
        idx = np.arange(size)
        stacked = np.zeros((cols.size, size, size))
        stacked[:, idx, idx] = alphas[:size, cols].T
        if size > 1:
            off = betas[:size - 1, cols].T
            stacked[:, idx[:-1], idx[1:]] = off
            stacked[:, idx[1:], idx[:-1]] = off
        values, vectors = np.linalg.eigh(stacked)
        weights = vectors[:, 0, :] ** 2
        for j, col in enumerate(cols):
            rules[int(col)] = QuadratureRule(nodes=values[j], weights=weights[j])
    return rules


def lanczos_batch(A, V0: np.ndarray, m: int, reorthogonalize: bool = True,
                  breakdown_tol: float = DEFAULT_BREAKDOWN_TOL) -> List[LanczosResult]:
    """
    Independent Lanczos runs on the columns of V0, advanced together with
    block matvecs

    Every column keeps its own breakdown step, so each result matches
    ``lanczos`` on that column up to rounding. Nodes and weights come
    from a stacked ``numpy.linalg.eigh`` per Jacobi size, not the QL solver.
    """
    V0 = np.asarray(V0, dtype=np.float64)
    if V0.ndim != 2:
        raise PreconditionError(f"batched start vectors must be a 2-D array, got shape {V0.shape}")
    _check_request(A, m, V0)
    norms = np.linalg.norm(V0, axis=0)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        bad = int(np.flatnonzero(np.abs(norms - 1.0) > UNIT_TOL)[0])
        raise PreconditionError(f"start vector {bad} must have unit norm, got {norms[bad]:.17g}")

    n, k = V0.shape
    tol = _breakdown_threshold(A, breakdown_tol)
    basis = np.zeros((m + 1, n, k))
    basis[0] = V0
    alphas = np.zeros((m + 1, k))
    betas = np.zeros((m, k))
    steps = np.full(k, m)
    active = np.ones(k, dtype=bool)

    for j in range(m + 1):
        W = A.matmat(basis[j])
        alphas[j] = np.einsum('ik,ik->k', basis[j], W)
        if not np.all(np.isfinite(alphas[j, active])):
            bad = int(np.flatnonzero(active & ~np.isfinite(alphas[j]))[0])
            raise NumericalFailureError(f"non-finite alpha at Lanczos step {j} of column {bad}", index=bad)
        if j == m:
            break

        W -= alphas[j] * basis[j]
        if j > 0:
            W -= betas[j - 1] * basis[j - 1]
        if reorthogonalize:
            stored = basis[:j + 1]
            for _ in range(REORTH_PASSES):
                coeffs = np.einsum('jik,ik->jk', stored, W)
                W -= np.einsum('jik,jk->ik', stored, coeffs)

        beta = np.linalg.norm(W, axis=0)
        if not np.all(np.isfinite(beta[active])):
            bad = int(np.flatnonzero(active & ~np.isfinite(beta))[0])
            raise NumericalFailureError(f"non-finite beta at Lanczos step {j} of column {bad}", index=bad)

        stopped = active & (beta <= tol)
        if stopped.any():
            steps[stopped] = j
            active &= ~stopped
            logger.debug(f"Lanczos breakdown in {int(stopped.sum())} column(s) at step {j}")
        betas[j] = np.where(active, beta, 0.0)
        basis[j + 1] = np.where(active, W / np.where(active, beta, 1.0), 0.0)
        if not active.any():
            break

    rules = _rules_by_size(alphas, betas, steps)
    results = []
    for col in range(k):
        s = int(steps[col])
        results.append(LanczosResult(
            tridiagonal=TridiagonalMatrix(alphas[:s + 1, col], betas[:s, col]),
            rule=rules[col],
            steps_completed=s,
            breakdown=bool(s < m),
            mvm_count=s + 1,
        ))
    return results
