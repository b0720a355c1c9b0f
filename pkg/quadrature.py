"""
Spectral Riemann-Stieltjes measures, quadrature evaluation and affine maps
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from errors import DomainError, InvalidInputError, PreconditionError
from lanczos import QuadratureRule
from tridiag_eig import DEFAULT_ORACLE_CAP, dense_eigen

logger = logging.getLogger(__name__)

MEASURE_TOL = 1e-12


@dataclass(frozen=True)
class ScalarFunction:
    """A named scalar function with a domain predicate"""
    name: str
    func: Callable[[np.ndarray], np.ndarray]
    domain: Callable[[np.ndarray], np.ndarray] = lambda x: np.ones_like(x, dtype=bool)

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x) -> np.ndarray:
        """Evaluate elementwise; DomainError when any value is out of domain or non-finite"""
        x = np.asarray(x, dtype=np.float64)
        with np.errstate(all='ignore'):
            inside = np.asarray(self.domain(x), dtype=bool)
            values = np.where(inside, self.func(np.where(inside, x, 1.0)), np.nan)
        bad = ~np.isfinite(values)
        if np.any(bad):
            index = int(np.flatnonzero(bad.ravel())[0])
            raise DomainError(f"{self.name} is undefined at {x.ravel()[index]:.17g}", index=index)
        return values


def monomial(d: int) -> ScalarFunction:
    if d < 0:
        raise InvalidInputError(f"monomial degree must be nonnegative, got {d}")
    return ScalarFunction(f't^{d}', lambda x: x ** d)


FUNCTIONS: Dict[str, ScalarFunction] = {
    'log': ScalarFunction('log', np.log, lambda x: x > 0),
    'exp': ScalarFunction('exp', np.exp),
    'sqrt': ScalarFunction('sqrt', np.sqrt, lambda x: x >= 0),
    'inverse': ScalarFunction('inverse', lambda x: 1.0 / x, lambda x: x != 0),
}


def get_function(f: Union[str, ScalarFunction, Callable]) -> ScalarFunction:
    if isinstance(f, ScalarFunction):
        return f
    if isinstance(f, str):
        if f not in FUNCTIONS:
            raise InvalidInputError(f"unknown function {f!r}; expected one of {sorted(FUNCTIONS)}")
        return FUNCTIONS[f]
    if callable(f):
        return ScalarFunction(getattr(f, '__name__', 'f'), f)
    raise InvalidInputError(f"not a scalar function: {f!r}")


@dataclass(frozen=True)
class SpectralMeasure:
    """Point masses (q_j^T v)^2 at ascending eigenvalues"""
    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64).ravel()
        masses = np.asarray(self.masses, dtype=np.float64).ravel()
        if points.size == 0 or points.size != masses.size:
            raise InvalidInputError("measure needs equally many points and masses")
        if np.any(np.diff(points) < 0):
            raise InvalidInputError("measure points must be ascending")
        if np.any(masses < 0):
            raise InvalidInputError("measure masses must be nonnegative")
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'masses', masses)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())


@dataclass(frozen=True)
class AffineMap:
    """h(t) = slope * t + intercept"""
    slope: float
    intercept: float

    def __post_init__(self):
        if not (math.isfinite(self.slope) and math.isfinite(self.intercept)) or self.slope == 0:
            raise InvalidInputError(f"affine map needs a finite nonzero slope, got {self.slope}")

    @classmethod
    def from_interval(cls, lo: float, hi: float) -> 'AffineMap':
        """Map [-1, 1] onto [lo, hi]"""
        if not lo < hi:
            raise InvalidInputError(f"interval must satisfy lo < hi, got [{lo}, {hi}]")
        return cls((hi - lo) / 2.0, (hi + lo) / 2.0)

    def apply(self, t):
        return self.slope * np.asarray(t, dtype=np.float64) + self.intercept

    def inverse(self, x):
        return (np.asarray(x, dtype=np.float64) - self.intercept) / self.slope


def measure_from_vector(A, v: np.ndarray, cap: int = DEFAULT_ORACLE_CAP) -> SpectralMeasure:
    """
    Masses (q_j^T v)^2 over the eigenpairs of A

    Diagonal and spectral operators use their stored eigenbasis; other
    forms go through the dense oracle and its cap.
    """
    v = np.asarray(v, dtype=np.float64)
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise PreconditionError(f"measure needs a unit vector, got norm {np.linalg.norm(v):.17g}")

    form = getattr(A, 'form', None)
    if form == 'diagonal':
        points, coords = A.diagonal, v
    elif form == 'spectral':
        points, coords = A.eigenvalues, A.eigenvector_coordinates(v)
    else:
        points, Q = dense_eigen(A, cap)
        coords = Q.T @ v
    order = np.argsort(points, kind='stable')
    return SpectralMeasure(points=np.asarray(points)[order], masses=coords[order] ** 2)


def measure_cdf(mu: SpectralMeasure, t: float) -> float:
    """Right-continuous step function: total mass at points <= t"""
    k = int(np.searchsorted(mu.points, t, side='right'))
    return float(mu.masses[:k].sum())


def exact_rs_integral(mu: SpectralMeasure, f) -> float:
    f = get_function(f)
    return float(mu.masses @ f.evaluate(mu.points))


def quadrature_eval(rule: QuadratureRule, f) -> float:
    """sum_k tau_k f(theta_k)"""
    f = get_function(f)
    return float(rule.weights @ f.evaluate(rule.nodes))


def pushforward_measure(mu: SpectralMeasure, h: AffineMap) -> SpectralMeasure:
    """Move points by h^-1; masses are unchanged (no extra scalar factor)"""
    points = h.inverse(mu.points)
    masses = mu.masses
    if h.slope < 0:
        points, masses = points[::-1], masses[::-1]
    return SpectralMeasure(points=points, masses=masses)


def pushforward_rule(rule: QuadratureRule, h: AffineMap) -> QuadratureRule:
    nodes = h.inverse(rule.nodes)
    weights = rule.weights
    if h.slope < 0:
        nodes, weights = nodes[::-1], weights[::-1]
    return QuadratureRule(nodes=nodes, weights=weights)


def quadrature_error(mu: SpectralMeasure, rule: QuadratureRule, f) -> float:
    """|integral of f against mu - quadrature of f|"""
    f = get_function(f)
    return abs(exact_rs_integral(mu, f) - quadrature_eval(rule, f))


def measure_grid(mu: SpectralMeasure, num: int = 1000,
                 lo: Optional[float] = None, hi: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Sample (t, mu(t)) on ``num`` evenly spaced points over [lo, hi]"""
    if num < 2:
        raise InvalidInputError(f"grid needs at least 2 points, got {num}")
    lo = float(mu.points[0]) if lo is None else lo
    hi = float(mu.points[-1]) if hi is None else hi
    t = np.linspace(lo, hi, num)
    cumulative = np.concatenate([[0.0], np.cumsum(mu.masses)])
    return t, cumulative[np.searchsorted(mu.points, t, side='right')]
