"""
Certified (m, N) planning for SLQ log-determinant estimates

Four selection rules:
    ucs_symmetric       legacy absolute bound, valid only for symmetric nodes
    corrected_absolute  absolute bound with the asymmetric-node constant
    relative            relative bound for spectra inside (0, 1)
    optimized           relative bound with the error split reallocated
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

from scipy.optimize import brentq

from errors import (DegenerateSpectrumError, InvalidInputError, InvalidRegimeError,
                    NoInteriorMinimizerError, PreconditionError, UndefinedTargetError)
from input_validation import InputValidator
from operators import SpectrumBounds

logger = logging.getLogger(__name__)

THEOREMS = ('ucs_symmetric', 'corrected_absolute', 'relative', 'optimized')
RELATIVE_THEOREMS = ('relative', 'optimized')
ABSOLUTE_THEOREMS = ('ucs_symmetric', 'corrected_absolute')

ALPHA_TOL = 1e-12
SMALL_LOG_RATIO = 1e-6


@dataclass(frozen=True)
class PlanRequest:
    bounds: SpectrumBounds
    epsilon: float
    eta: float
    theorem: str

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise InvalidInputError(f"unknown theorem {self.theorem!r}; expected one of {THEOREMS}")
        # absolute eps is per matrix entry: any positive value
        if self.theorem in RELATIVE_THEOREMS:
            InputValidator.validate_open_unit(self.epsilon, 'epsilon')
        else:
            InputValidator.validate_positive_real(self.epsilon, 'epsilon')
        InputValidator.validate_open_unit(self.eta, 'eta')
        if self.theorem in RELATIVE_THEOREMS and self.bounds.lambda_max >= 1.0:
            raise PreconditionError(
                f"{self.theorem} plan needs lambda_max < 1, got {self.bounds.lambda_max:.6g}; rescale first")


@dataclass(frozen=True)
class BoundPlan:
    theorem: str
    m: int
    N: int
    rho: float
    M_rho: float
    K_rho: float
    mvm_total: int
    m_real: float
    N_real: float
    n: int
    epsilon: float
    eta: float
    alpha_star: Optional[float] = None
    C: Optional[float] = None
    log_ratio: Optional[float] = None
    include_n: bool = False

    @property
    def symmetric_nodes_only(self) -> bool:
        return self.theorem == 'ucs_symmetric'

    def to_record(self) -> Dict[str, Any]:
        """Field-ordered record for JSON and CSV output"""
        return asdict(self)


def _ceil_positive(x: float) -> int:
    return max(1, math.ceil(x))


def _make_plan(req: PlanRequest, rho: float, M: float, K: float, m_real: float, N_real: float,
               **extra) -> BoundPlan:
    m = _ceil_positive(m_real)
    N = _ceil_positive(N_real)
    plan = BoundPlan(theorem=req.theorem, m=m, N=N, rho=rho, M_rho=M, K_rho=K,
                     mvm_total=N * (m + 1), m_real=m_real, N_real=N_real, n=req.bounds.n,
                     epsilon=req.epsilon, eta=req.eta, **extra)
    logger.info(f"{req.theorem} plan: m={m}, N={N}, MVMs={plan.mvm_total} "
                f"(kappa={req.bounds.kappa:.6g}, eps={req.epsilon}, eta={req.eta})")
    return plan


def rho_absolute(kappa: float) -> float:
    root = math.sqrt(2.0 * kappa + 1.0)
    return (root + 1.0) / (root - 1.0)


def M_absolute(kappa: float) -> float:
    return 5.0 * math.log(2.0 * (kappa + 1.0))


def rho_relative(bounds: SpectrumBounds) -> float:
    lmin, lmax = bounds.lambda_min, bounds.lambda_max
    if lmin == lmax:
        raise DegenerateSpectrumError(
            f"lambda_min == lambda_max == {lmin:.6g}; the ellipse radius is undefined")
    return (lmax + math.sqrt(2.0 * lmin * lmax - lmin ** 2)) / (lmax - lmin)


def M_relative(bounds: SpectrumBounds) -> float:
    return math.sqrt(math.log(bounds.lambda_min / 2.0) ** 2 + math.pi ** 2)


def log_ratio(bounds: SpectrumBounds) -> float:
    """log(kappa^(1/n) / lambda_max), the lower bound on |logdet| / n"""
    value = math.log(bounds.kappa) / bounds.n - math.log(bounds.lambda_max)
    if value <= 0:
        raise InvalidRegimeError(
            f"log(kappa^(1/n)/lambda_max) = {value:.6g} <= 0; no positive lower bound on |logdet|")
    if value < SMALL_LOG_RATIO:
        logger.warning(f"log(kappa^(1/n)/lambda_max) = {value:.3e} is tiny; m will be very large")
    return value


def symmetric_node_bound(rho: float, M: float, m: int) -> float:
    """Quadrature error constant for symmetric nodes"""
    return 4.0 * M / (1.0 - rho ** -2) * rho ** (-2 * m - 2)


def asymmetric_node_bound(rho: float, M: float, m: int) -> float:
    """Quadrature error constant valid for arbitrary node placement"""
    return 4.0 * M / (1.0 - 1.0 / rho) * rho ** (-2 * m - 2)


def _absolute_N(req: PlanRequest) -> float:
    return 24.0 / req.epsilon ** 2 * math.log1p(req.bounds.kappa) ** 2 * math.log(2.0 / req.eta)


def plan_ucs_symmetric(req: PlanRequest) -> BoundPlan:
    kappa = req.bounds.kappa
    K = 5.0 * kappa * math.log(2.0 * (kappa + 1.0)) / math.sqrt(2.0 * kappa + 1.0)
    m_real = math.sqrt(3.0 * kappa) / 4.0 * math.log(K / req.epsilon)
    logger.warning("ucs_symmetric plan is valid for symmetric quadrature nodes only")
    return _make_plan(req, rho_absolute(kappa), M_absolute(kappa), K, m_real, _absolute_N(req))


def plan_corrected_absolute(req: PlanRequest) -> BoundPlan:
    kappa = req.bounds.kappa
    rho = rho_absolute(kappa)
    M = M_absolute(kappa)
    K = 8.0 * M / (rho ** 2 - rho)
    m_real = math.log(K / req.epsilon) / (2.0 * math.log(rho))
    return _make_plan(req, rho, M, K, m_real, _absolute_N(req))


def plan_relative(req: PlanRequest) -> BoundPlan:
    rho = rho_relative(req.bounds)
    M = M_relative(req.bounds)
    L = log_ratio(req.bounds)
    K = 8.0 * M / (rho ** 2 - rho)
    m_real = math.log(K / (req.epsilon * L)) / (2.0 * math.log(rho))
    N_real = 24.0 / req.epsilon ** 2 * math.log(2.0 / req.eta)
    return _make_plan(req, rho, M, K, m_real, N_real, log_ratio=L)


def alpha_objective(alpha: float, C: float) -> float:
    """Pre-ceiling MVM proxy log(C*alpha) * (alpha/(alpha-1))^2"""
    return math.log(C * alpha) * (alpha / (alpha - 1.0)) ** 2


def _alpha_residual(alpha: float, C: float) -> float:
    return alpha - 2.0 * math.log(alpha) - 2.0 * math.log(C) - 1.0


def solve_alpha_star(C: float) -> float:
    """
    Solve alpha = 2 log(alpha) + 2 log(C) + 1 for the minimizer of alpha_objective

    The residual is convex with its minimum at alpha = 2, so a root above
    2 exists iff the residual at 2 is nonpositive; that larger root is the
    local minimum of the objective.

    Raises:
        NoInteriorMinimizerError: C < sqrt(e)/2, no stationary point
    """
    C = InputValidator.validate_positive_real(C, 'C')
    at_two = _alpha_residual(2.0, C)
    if at_two > ALPHA_TOL:
        raise NoInteriorMinimizerError(
            f"no admissible alpha for C={C:.6g}: the objective is minimized only in the limit")
    if at_two >= -ALPHA_TOL:
        return 2.0
    upper = max(4.0 * math.log(C) + 10.0, 10.0)
    alpha = brentq(_alpha_residual, 2.0, upper, args=(C,), xtol=1e-14, maxiter=200)
    logger.debug(f"alpha*={alpha:.12g} for C={C:.6g}")
    return float(alpha)


def plan_optimized(req: PlanRequest, alpha: Optional[float] = None,
                   include_n: bool = False) -> BoundPlan:
    """
    Relative guarantee with the quadrature/sampling error split chosen to
    minimize m*N; ``alpha`` forces the split (alpha = 2 is the even split)
    """
    rho = rho_relative(req.bounds)
    M = M_relative(req.bounds)
    L = log_ratio(req.bounds)
    C = 4.0 * M / (req.epsilon * (rho ** 2 - rho) * L)

    if alpha is None:
        try:
            alpha = solve_alpha_star(C)
        except NoInteriorMinimizerError as e:
            logger.warning(f"{e}; falling back to alpha=2")
            alpha = 2.0
    elif not alpha > 1.0:
        raise InvalidInputError(f"alpha must exceed 1, got {alpha}")

    K = 4.0 * alpha * M / (rho ** 2 - rho)
    target = K / (req.epsilon * L)
    if include_n:
        target *= req.bounds.n
    m_real = math.log(target) / (2.0 * math.log(rho))
    N_real = 6.0 / req.epsilon ** 2 * (alpha / (alpha - 1.0)) ** 2 * math.log(2.0 / req.eta)
    return _make_plan(req, rho, M, K, m_real, N_real, alpha_star=alpha, C=C,
                      log_ratio=L, include_n=include_n)


def plan(req: PlanRequest, include_n: bool = False) -> BoundPlan:
    if req.theorem == 'ucs_symmetric':
        return plan_ucs_symmetric(req)
    if req.theorem == 'corrected_absolute':
        return plan_corrected_absolute(req)
    if req.theorem == 'relative':
        return plan_relative(req)
    return plan_optimized(req, include_n=include_n)


def epsilon_from_relative_target(eps_star: float, logdet: float, n: int) -> float:
    """Absolute per-entry tolerance eps*|logdet|/n (benchmark conversion)"""
    if logdet == 0:
        raise UndefinedTargetError("relative target is undefined when logdet = 0")
    return eps_star * abs(logdet) / n
