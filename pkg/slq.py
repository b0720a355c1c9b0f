"""
Stochastic Lanczos quadrature estimates of tr(f(A)), log-determinant by default
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional

import numpy as np

from bounds import RELATIVE_THEOREMS, BoundPlan, PlanRequest, plan
from errors import DomainError, NotSPDError, PreconditionError
from input_validation import InputValidator
from lanczos import DEFAULT_BREAKDOWN_TOL, lanczos_batch
from operators import (LinearOperator, SpectrumBounds, estimate_spectrum_bounds,
                       exact_spectrum_bounds, rescale_to_unit)
from quadrature import get_function, quadrature_eval
from tridiag_eig import DEFAULT_ORACLE_CAP, dense_eigen

logger = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 512
BASIS_BUDGET_BYTES = 256 * 2 ** 20

CSV_HEADER = ('theorem', 'n', 'm', 'N', 'mvm', 'estimate', 'exact', 'rel_err', 'seed')


@dataclass(frozen=True)
class SlqConfig:
    m: int
    N: int
    seed: int = 0
    reorthogonalize: bool = True
    function: str = 'log'
    batch_size: int = DEFAULT_BATCH_SIZE
    breakdown_tol: float = DEFAULT_BREAKDOWN_TOL

    def __post_init__(self):
        InputValidator.validate_positive_int(self.m, 'm')
        InputValidator.validate_positive_int(self.N, 'N')
        InputValidator.validate_positive_int(self.seed, 'seed', minimum=0)
        InputValidator.validate_positive_int(self.batch_size, 'batch_size')


@dataclass(frozen=True)
class EstimateResult:
    estimate: float
    per_query: np.ndarray
    mvm_total: int
    n: int
    m: int
    N: int
    seed: int
    scale_correction: float = 0.0
    plan: Optional[BoundPlan] = None
    theorem: Optional[str] = None
    breakdowns: int = 0
    exact: Optional[float] = None
    relative_error: Optional[float] = None

    def to_record(self) -> Dict[str, Any]:
        record = {
            'theorem': self.theorem,
            'n': self.n,
            'm': self.m,
            'N': self.N,
            'seed': self.seed,
            'estimate': self.estimate,
            'mvm_total': self.mvm_total,
            'scale_correction': self.scale_correction,
            'breakdowns': self.breakdowns,
            'exact': self.exact,
            'relative_error': self.relative_error,
            'plan': self.plan.to_record() if self.plan else None,
            'per_query': [float(x) for x in self.per_query],
        }
        return record

    def csv_row(self) -> List[str]:
        """Values for CSV_HEADER; floats in round-trip precision"""
        def fmt(x):
            return '' if x is None else f'{x:.17g}'
        return [self.theorem or 'manual', str(self.n), str(self.m), str(self.N), str(self.mvm_total),
                fmt(self.estimate), fmt(self.exact), fmt(self.relative_error), str(self.seed)]


def query_generator(seed: int, index: int) -> np.random.Generator:
    """Counter-based substream for query ``index``, independent of execution order"""
    return np.random.Generator(np.random.Philox(key=seed ^ index))


def rademacher_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """Entries +-1/sqrt(n), each sign with probability 1/2"""
    signs = 2.0 * rng.integers(0, 2, size=n) - 1.0
    return signs / math.sqrt(n)


def rademacher_block(n: int, seed: int, start: int, count: int) -> np.ndarray:
    """Columns are the unit probe vectors of queries start .. start+count-1"""
    return np.column_stack([rademacher_unit_vector(n, query_generator(seed, start + j))
                            for j in range(count)])


def hutchinson_mean(F: np.ndarray, Z: np.ndarray) -> float:
    """Mean of z^T F z over the columns z of Z"""
    return float(np.mean(np.einsum('ik,ij,jk->k', Z, F, Z)))


def girard_hutchinson(A: LinearOperator, f='log', N: int = 1, seed: int = 0,
                      cap: int = DEFAULT_ORACLE_CAP) -> float:
    """
    Girard-Hutchinson estimate of tr(f(A)) with exact quadratic forms

    f(A) is formed from the dense eigendecomposition (desk scale only);
    probes are unnormalized Rademacher vectors.
    """
    f = get_function(f)
    N = InputValidator.validate_positive_int(N, 'N')
    if A.form == 'diagonal':
        F = np.diag(f.evaluate(A.diagonal))
    else:
        values, Q = dense_eigen(A, cap)
        F = (Q * f.evaluate(values)) @ Q.T
    Z = rademacher_block(A.dim, seed, 0, N) * math.sqrt(A.dim)
    return hutchinson_mean(F, Z)


def _effective_batch(n: int, m: int, batch_size: int) -> int:
    per_column = 8 * n * (m + 1)
    return max(1, min(batch_size, BASIS_BUDGET_BYTES // per_column))


def slq_estimate(A: LinearOperator, cfg: SlqConfig, scale_correction: float = 0.0) -> EstimateResult:
    """
    Average n * sum_k tau_k f(theta_k) over N Rademacher queries

    Queries run in fixed-size blocks of column vectors; each query draws
    from its own substream so the result depends only on (seed, cfg, A).

    Raises:
        NotSPDError: a log node is nonpositive (``query_index`` names the query)
    """
    n = A.dim
    m = min(cfg.m, n - 1)
    if m < cfg.m:
        logger.info(f"Clamping m={cfg.m} to dim-1={m}")
    f = get_function(cfg.function)
    batch = _effective_batch(n, m, cfg.batch_size)

    per_query = np.empty(cfg.N)
    mvm_total = 0
    breakdowns = 0
    for start in range(0, cfg.N, batch):
        count = min(batch, cfg.N - start)
        results = lanczos_batch(A, rademacher_block(n, cfg.seed, start, count), m,
                                reorthogonalize=cfg.reorthogonalize, breakdown_tol=cfg.breakdown_tol)
        for j, result in enumerate(results):
            index = start + j
            try:
                value = quadrature_eval(result.rule, f)
            except DomainError as e:
                if f.name != 'log':
                    raise
                logger.error(f"Query {index}: node {result.rule.nodes[0]:.6g} outside the log domain")
                raise NotSPDError(
                    f"query {index}: Ritz value {result.rule.nodes[0]:.6g} <= 0; "
                    f"A is not SPD or m is too small", query_index=index) from e
            per_query[index] = n * value
            mvm_total += result.mvm_count
            breakdowns += int(result.breakdown)
        logger.debug(f"Finished queries {start}..{start + count - 1}")

    estimate = float(np.mean(per_query)) + scale_correction
    logger.info(f"SLQ estimate {estimate:.12g} from N={cfg.N} queries, m={m}, {mvm_total} MVMs")
    return EstimateResult(estimate=estimate, per_query=per_query, mvm_total=mvm_total,
                          n=n, m=m, N=cfg.N, seed=cfg.seed, scale_correction=scale_correction,
                          breakdowns=breakdowns)


def attach_exact(result: EstimateResult, exact: float) -> EstimateResult:
    relative_error = abs(result.estimate - exact) / abs(exact) if exact != 0 else None
    return replace(result, exact=exact, relative_error=relative_error)


def estimate_with_plan(A: LinearOperator, bounds: Optional[SpectrumBounds] = None,
                       epsilon: float = 0.1, eta: float = 0.1, theorem: str = 'relative',
                       rescale: bool = False, seed: int = 0, reorthogonalize: bool = True,
                       batch_size: int = DEFAULT_BATCH_SIZE, headroom: float = 0.99,
                       include_n: bool = False) -> EstimateResult:
    """
    Plan (m, N) for the requested guarantee and run SLQ with it

    Without ``bounds`` the stored spectrum is used when the operator has
    one, otherwise a heuristic Lanczos probe. Relative plans need
    lambda_max < 1: pass ``rescale`` to scale A and correct the result.

    Raises:
        PreconditionError: relative plan, lambda_max >= 1 and no rescale
    """
    if bounds is None:
        bounds = exact_spectrum_bounds(A) or estimate_spectrum_bounds(A, seed=seed)

    def run(m, N, correction=0.0, operator=A):
        cfg = SlqConfig(m=m, N=N, seed=seed, reorthogonalize=reorthogonalize, batch_size=batch_size)
        return slq_estimate(operator, cfg, correction)

    if theorem in RELATIVE_THEOREMS and bounds.lambda_min == bounds.lambda_max:
        logger.warning("Degenerate spectrum (c*I): one exact query replaces the plan")
        return replace(run(1, 1), theorem=theorem)

    correction = 0.0
    operator = A
    if theorem in RELATIVE_THEOREMS and bounds.lambda_max >= 1.0:
        if not rescale:
            raise PreconditionError(
                f"{theorem} plan needs lambda_max < 1 (got {bounds.lambda_max:.6g}); enable rescaling")
        operator, correction = rescale_to_unit(A, bounds, headroom)
        bounds = bounds.scaled(headroom / bounds.lambda_max)

    chosen = plan(PlanRequest(bounds, epsilon, eta, theorem), include_n=include_n)
    result = run(chosen.m, chosen.N, correction, operator)
    return replace(result, plan=chosen, theorem=theorem)
