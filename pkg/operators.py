"""
Implicit symmetric operators, synthetic generators and spectrum utilities
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sps

from errors import (InvalidInputError, MalformedInputError, NotSPDError,
                    OracleTooLargeError, UnsupportedFormatError)
from input_validation import InputValidator
from matrix_market import MatrixMarketReader

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 2000
DEFAULT_SAFETY = 1.01
DEFAULT_PROBE_STEPS = 60
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SpectrumBounds:
    """Enclosing interval [lambda_min, lambda_max] of an SPD spectrum"""
    lambda_min: float
    lambda_max: float
    n: int
    heuristic: bool = False

    def __post_init__(self):
        if not (0.0 < self.lambda_min <= self.lambda_max) or not math.isfinite(self.lambda_max):
            raise InvalidInputError(
                f"spectrum bounds need 0 < lambda_min <= lambda_max, got "
                f"[{self.lambda_min}, {self.lambda_max}]")
        if self.n < 1:
            raise InvalidInputError(f"dimension must be positive, got {self.n}")

    @property
    def kappa(self) -> float:
        return self.lambda_max / self.lambda_min

    def scaled(self, s: float) -> 'SpectrumBounds':
        return SpectrumBounds(self.lambda_min * s, self.lambda_max * s, self.n, self.heuristic)


class LinearOperator(ABC):
    """
    Immutable implicit symmetric matrix

    Subclasses implement ``_apply`` for both a single vector (1-D) and a
    block of column vectors (2-D); nothing is mutated after construction
    so concurrent matvecs are safe.
    """

    form = 'abstract'

    def __init__(self, dim: int):
        self._dim = InputValidator.validate_positive_int(dim, 'dim')

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def shape(self) -> Tuple[int, int]:
        return (self._dim, self._dim)

    @abstractmethod
    def _apply(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def scaled(self, s: float) -> 'LinearOperator':
        """Return a new operator representing s * A"""

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self._dim,):
            raise InvalidInputError(f"matvec expects a vector of length {self._dim}, got shape {x.shape}")
        return self._apply(x)

    def matmat(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] != self._dim:
            raise InvalidInputError(f"matmat expects shape ({self._dim}, k), got {X.shape}")
        return self._apply(X)

    def to_dense(self, cap: Optional[int] = DEFAULT_ORACLE_CAP) -> np.ndarray:
        """Materialize A; refused above the oracle cap"""
        if cap is not None and self._dim > cap:
            raise OracleTooLargeError(self._dim, cap)
        return self._apply(np.eye(self._dim))

    def known_spectrum(self) -> Optional[np.ndarray]:
        """Ascending eigenvalues when the form stores them, else None"""
        return None

    def norm_estimate(self) -> float:
        """Cheap upper estimate of the 2-norm"""
        spectrum = self.known_spectrum()
        if spectrum is not None:
            return float(np.max(np.abs(spectrum)))
        return float(np.max(np.abs(self.to_dense(None)).sum(axis=0)))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self._dim})"


class DiagonalOperator(LinearOperator):
    form = 'diagonal'

    def __init__(self, diagonal):
        diagonal = np.array(diagonal, dtype=np.float64).ravel()
        if diagonal.size == 0 or not np.all(np.isfinite(diagonal)):
            raise InvalidInputError("diagonal must be a nonempty finite vector")
        super().__init__(diagonal.size)
        diagonal.flags.writeable = False
        self.diagonal = diagonal

    def _apply(self, x):
        return self.diagonal * x if x.ndim == 1 else self.diagonal[:, None] * x

    def scaled(self, s):
        return DiagonalOperator(self.diagonal * s)

    def to_dense(self, cap=DEFAULT_ORACLE_CAP):
        if cap is not None and self._dim > cap:
            raise OracleTooLargeError(self._dim, cap)
        return np.diag(self.diagonal)

    def known_spectrum(self):
        return np.sort(self.diagonal, kind='stable')


class DenseOperator(LinearOperator):
    form = 'dense'

    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.size == 0:
            raise InvalidInputError(f"dense operator needs a nonempty square matrix, got {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise InvalidInputError("dense operator has non-finite entries")
        scale = max(float(np.max(np.abs(matrix))), 1.0)
        if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOL * scale:
            raise InvalidInputError("dense operator is not symmetric")
        super().__init__(matrix.shape[0])
        matrix = 0.5 * (matrix + matrix.T)
        matrix.flags.writeable = False
        self.matrix = matrix

    def _apply(self, x):
        return self.matrix @ x

    def scaled(self, s):
        return DenseOperator(self.matrix * s)

    def to_dense(self, cap=DEFAULT_ORACLE_CAP):
        if cap is not None and self._dim > cap:
            raise OracleTooLargeError(self._dim, cap)
        return np.array(self.matrix)

    def norm_estimate(self):
        return float(np.max(np.abs(self.matrix).sum(axis=0)))


class SparseOperator(LinearOperator):
    """Compressed-row storage of the full (mirrored) symmetric pattern"""
    form = 'sparse'

    def __init__(self, matrix, check_symmetry: bool = True):
        csr = sps.csr_array(matrix, dtype=np.float64)
        if csr.shape[0] != csr.shape[1] or csr.shape[0] == 0:
            raise InvalidInputError(f"sparse operator needs a nonempty square matrix, got {csr.shape}")
        csr.sum_duplicates()
        csr.sort_indices()
        if check_symmetry and csr.nnz:
            asym = abs(csr - csr.T)
            scale = max(float(abs(csr).max()), 1.0)
            if asym.nnz and asym.max() > SYMMETRY_TOL * scale:
                raise UnsupportedFormatError("sparse operator is not symmetric")
        super().__init__(csr.shape[0])
        self.matrix = csr

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def _apply(self, x):
        return self.matrix @ x

    def scaled(self, s):
        return SparseOperator(self.matrix * s, check_symmetry=False)

    def to_dense(self, cap=DEFAULT_ORACLE_CAP):
        if cap is not None and self._dim > cap:
            raise OracleTooLargeError(self._dim, cap)
        return self.matrix.toarray()

    def norm_estimate(self):
        if self.matrix.nnz == 0:
            return 0.0
        return float(abs(self.matrix).sum(axis=0).max())


class SpectralOperator(LinearOperator):
    """
    A = H diag(eigenvalues) H with the normalized Householder reflector
    H = I - (2/n) 1 1^T, applied implicitly in O(n) per vector
    """
    form = 'spectral'

    def __init__(self, eigenvalues):
        eigenvalues = np.array(eigenvalues, dtype=np.float64).ravel()
        if eigenvalues.size == 0 or not np.all(np.isfinite(eigenvalues)):
            raise InvalidInputError("eigenvalue list must be nonempty and finite")
        super().__init__(eigenvalues.size)
        eigenvalues.flags.writeable = False
        self.eigenvalues = eigenvalues

    def _reflect(self, x):
        return x - (2.0 / self._dim) * x.sum(axis=0)

    def _apply(self, x):
        lam = self.eigenvalues if x.ndim == 1 else self.eigenvalues[:, None]
        return self._reflect(lam * self._reflect(x))

    def scaled(self, s):
        return SpectralOperator(self.eigenvalues * s)

    def known_spectrum(self):
        return np.sort(self.eigenvalues, kind='stable')

    def eigenvector_coordinates(self, v: np.ndarray) -> np.ndarray:
        """Q^T v for Q = H, ordered like the stored eigenvalues"""
        return self._reflect(np.asarray(v, dtype=np.float64))


def householder_reflector(n: int) -> np.ndarray:
    return np.eye(n) - (2.0 / n) * np.ones((n, n))


def generate_decay_spectrum(n: int, r: float, scale: float = 1.0) -> DiagonalOperator:
    """Diagonal operator with eigenvalues scale / i**r, i = 1..n"""
    n = InputValidator.validate_positive_int(n, 'n')
    r = InputValidator.validate_real(r, 'r')
    if r < 0:
        raise InvalidInputError(f"decay rate r must be nonnegative, got {r}")
    scale = InputValidator.validate_positive_real(scale, 'scale')
    i = np.arange(1, n + 1, dtype=np.float64)
    return DiagonalOperator(scale / i ** r)


def generate_householder_matrix(eigenvalues) -> DenseOperator:
    """Dense A = H diag(eigenvalues) H^T with H = I - (2/n) 1 1^T"""
    lam = np.array(eigenvalues, dtype=np.float64).ravel()
    if lam.size == 0:
        raise InvalidInputError("eigenvalue list must be nonempty")
    H = householder_reflector(lam.size)
    return DenseOperator((H * lam) @ H.T)


def load_eigenvalue_list(path: Union[str, Path]) -> np.ndarray:
    """One real per line; blank lines and '#' comments ignored"""
    path = InputValidator.validate_file_path(path)
    values: List[float] = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            text = line.split('#', 1)[0].strip()
            if not text:
                continue
            try:
                value = float(text)
            except ValueError:
                raise MalformedInputError(f"not a real number: {text!r}", line_number)
            if not math.isfinite(value):
                raise MalformedInputError(f"non-finite eigenvalue {text!r}", line_number)
            values.append(value)
    if not values:
        raise MalformedInputError(f"no eigenvalues found in {path}")
    logger.info(f"Loaded {len(values)} eigenvalues from {path}")
    return np.asarray(values)


def read_matrix_market(path: Union[str, Path]) -> SparseOperator:
    """Read a coordinate real symmetric Matrix Market file into CSR form"""
    path = InputValidator.validate_file_path(path)
    with MatrixMarketReader(path) as reader:
        entries = reader.read_entries()

    n = entries.header.rows
    if n == 0:
        raise MalformedInputError(f"{path} declares an empty matrix")
    rows, cols, values = entries.rows, entries.cols, entries.values
    if entries.header.symmetry == 'symmetric':
        off = rows != cols
        rows, cols, values = (np.concatenate([rows, cols[off]]),
                              np.concatenate([cols, rows[off]]),
                              np.concatenate([values, values[off]]))
    matrix = sps.coo_array((values, (rows, cols)), shape=(n, n)).tocsr()
    operator = SparseOperator(matrix, check_symmetry=entries.header.symmetry == 'general')
    logger.info(f"Sparse operator from {path.name}: n={n}, nnz={operator.nnz}")
    return operator


def build_operator(spec: str, dense_cap: int = DEFAULT_ORACLE_CAP) -> LinearOperator:
    """Construct an operator from a CLI spec string"""
    parsed = InputValidator.parse_operator_spec(spec)
    kind = parsed['kind']
    if kind == 'decay':
        return generate_decay_spectrum(parsed['n'], parsed['r'], parsed['scale'])
    if kind == 'identity':
        n = InputValidator.validate_positive_int(parsed['n'], 'n')
        c = InputValidator.validate_real(parsed['c'], 'c')
        return DiagonalOperator(np.full(n, c))
    if kind == 'householder':
        eigenvalues = load_eigenvalue_list(parsed['file'])
        if eigenvalues.size > dense_cap:
            logger.info(f"{eigenvalues.size} eigenvalues exceed dense cap {dense_cap}; using implicit form")
            return SpectralOperator(eigenvalues)
        return generate_householder_matrix(eigenvalues)
    return read_matrix_market(parsed['file'])


def exact_spectrum_bounds(A: LinearOperator) -> Optional[SpectrumBounds]:
    """Exact bounds for forms that store their spectrum"""
    spectrum = A.known_spectrum()
    if spectrum is None:
        return None
    if spectrum[0] <= 0:
        raise NotSPDError(f"operator has nonpositive eigenvalue {spectrum[0]:.6g}")
    return SpectrumBounds(float(spectrum[0]), float(spectrum[-1]), A.dim, heuristic=False)


def estimate_spectrum_bounds(A: LinearOperator, probe_steps: int = DEFAULT_PROBE_STEPS,
                             safety: float = DEFAULT_SAFETY, seed: int = 0) -> SpectrumBounds:
    """
    Heuristic enclosure of the spectrum from a Lanczos probe

    ``probe_steps`` counts Krylov basis vectors, so probe_steps >= n
    reproduces the extreme eigenvalues up to rounding.
    """
    from lanczos import lanczos

    probe_steps = InputValidator.validate_positive_int(probe_steps, 'probe_steps', 2)
    safety = InputValidator.validate_real(safety, 'safety')
    if safety < 1.0:
        raise InvalidInputError(f"safety factor must be >= 1, got {safety}")

    rng = np.random.Generator(np.random.Philox(key=seed))
    v = rng.choice(np.array([-1.0, 1.0]), size=A.dim) / math.sqrt(A.dim)
    steps = min(probe_steps, A.dim) - 1
    result = lanczos(A, v, steps)

    low, high = float(result.rule.nodes[0]), float(result.rule.nodes[-1])
    if low <= 0:
        raise NotSPDError(f"Lanczos probe found nonpositive Ritz value {low:.6g}")
    bounds = SpectrumBounds(low / safety, high * safety, A.dim, heuristic=True)
    logger.warning(f"Heuristic spectrum bounds [{bounds.lambda_min:.6g}, {bounds.lambda_max:.6g}] "
                   f"from a {result.steps_completed + 1}-vector probe")
    return bounds


def rescale_to_unit(A: LinearOperator, bounds: SpectrumBounds,
                    headroom: float = 0.99) -> Tuple[LinearOperator, float]:
    """
    Scale A so its spectrum sits below ``headroom``

    Returns (s*A, n*log(1/s)); logdet(A) = logdet(s*A) + n*log(1/s).
    """
    headroom = InputValidator.validate_open_unit(headroom, 'headroom')
    s = headroom / bounds.lambda_max
    if s == 1.0:
        return A, 0.0
    correction = A.dim * math.log(1.0 / s)
    logger.info(f"Rescaled operator by s={s:.6g}; logdet correction {correction:.6g}")
    return A.scaled(s), correction
