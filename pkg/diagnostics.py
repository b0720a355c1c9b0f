"""
Quadrature node symmetry diagnostics and the four-case Ritz value harness
"""
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from errors import InvalidInputError, OracleTooLargeError, PreconditionError
from lanczos import lanczos
from operators import LinearOperator, generate_householder_matrix, read_matrix_market
from quadrature import SpectralMeasure, measure_from_vector, measure_grid
from tridiag_eig import DEFAULT_ORACLE_CAP, TridiagonalMatrix

logger = logging.getLogger(__name__)

DEFAULT_SYMMETRY_TOL = 1e-8
DEFAULT_GRID_POINTS = 1000
CASE_DIM = 50
CASES = (1, 2, 3, 4)

NODE_CSV_HEADER = ('case', 'node_index', 'theta', 'tau')
MEASURE_CSV_HEADER = ('case', 't', 'mu')


@dataclass
class SymmetryReport:
    lambda_bar: float
    diag_residual: float
    node_residual: float
    sav_holds: Optional[bool]
    spectrum_symmetric: Optional[bool]
    verdict: str
    m: int
    tolerance: float
    case: Optional[int] = None
    nodes: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)
    alphas: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)
    measure: Optional[SpectralMeasure] = field(default=None, repr=False)

    def summary(self) -> str:
        label = f"Case {self.case}" if self.case is not None else "Report"
        return (f"{label}: verdict={self.verdict}, lambda_bar={self.lambda_bar:.6g}, "
                f"diag_residual={self.diag_residual:.3e}, node_residual={self.node_residual:.3e}, "
                f"sav={_flag(self.sav_holds)}, symmetric_spectrum={_flag(self.spectrum_symmetric)}")


def _flag(value: Optional[bool]) -> str:
    return 'n/a' if value is None else ('yes' if value else 'no')


def has_symmetric_absolute_values(v, tol: float = 1e-12) -> bool:
    """|v_i| == |v_(n+1-i)| for every mirrored pair, within tol"""
    a = np.abs(np.asarray(v, dtype=np.float64).ravel())
    return bool(np.all(np.abs(a - a[::-1]) <= tol))


def spectrum_is_symmetric(eigenvalues, tol: float = 1e-12) -> Tuple[bool, float]:
    """Check lambda_i + lambda_(n+1-i) == 2 * lambda_bar with lambda_bar the interval center"""
    lam = np.asarray(eigenvalues, dtype=np.float64).ravel()
    if lam.size == 0:
        raise InvalidInputError("spectrum must be nonempty")
    lambda_bar = 0.5 * (lam[0] + lam[-1])
    return bool(np.all(np.abs(lam + lam[::-1] - 2.0 * lambda_bar) <= tol)), float(lambda_bar)


def symmetry_report(A: LinearOperator, v: np.ndarray, m: int, tol: float = DEFAULT_SYMMETRY_TOL,
                    cap: int = DEFAULT_ORACLE_CAP, case: Optional[int] = None) -> SymmetryReport:
    """
    Run Lanczos from v and measure how symmetric the Gauss nodes are

    ``tol`` is relative to the norm estimate of A. The spectral checks
    need the eigenbasis; above the oracle cap they are reported as None
    and the symmetry center falls back to the midpoint of the extreme nodes.
    """
    scale = max(A.norm_estimate(), np.finfo(np.float64).tiny)
    abs_tol = tol * scale
    m = min(m, A.dim - 1)

    measure = None
    sav_holds = spectrum_symmetric = None
    lambda_bar = None
    try:
        measure = measure_from_vector(A, v, cap)
    except OracleTooLargeError as e:
        logger.warning(f"{e}; spectral checks skipped")
    if measure is not None:
        sav_holds = has_symmetric_absolute_values(np.sqrt(measure.masses), tol)
        spectrum_symmetric, lambda_bar = spectrum_is_symmetric(measure.points, abs_tol)

    result = lanczos(A, v, m)
    nodes = result.rule.nodes
    if lambda_bar is None:
        lambda_bar = 0.5 * float(nodes[0] + nodes[-1])
    alphas = result.tridiagonal.alphas
    diag_residual = float(np.max(np.abs(alphas - lambda_bar)))
    node_residual = float(np.max(np.abs(nodes + nodes[::-1] - 2.0 * lambda_bar)))
    verdict = 'symmetric' if node_residual <= abs_tol else 'asymmetric'

    report = SymmetryReport(lambda_bar=float(lambda_bar), diag_residual=diag_residual,
                            node_residual=node_residual, sav_holds=sav_holds,
                            spectrum_symmetric=spectrum_symmetric, verdict=verdict, m=m,
                            tolerance=abs_tol, case=case, nodes=nodes, weights=result.rule.weights,
                            alphas=alphas, measure=measure)
    if verdict == 'asymmetric':
        logger.warning(f"Asymmetric quadrature nodes: {report.summary()}")
    else:
        logger.info(report.summary())
    return report


def random_symmetric_spectrum(n: int, rng: np.random.Generator, center: float = 1.0,
                              half_width: float = 0.9) -> np.ndarray:
    """Ascending spectrum mirrored about ``center``"""
    if not 0 < half_width < center:
        raise InvalidInputError("need 0 < half_width < center for a positive spectrum")
    offsets = rng.uniform(0.0, half_width, size=n // 2)
    middle = [center] if n % 2 else []
    return np.sort(np.concatenate([center - offsets, middle, center + offsets]))


def random_sav_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vector with mirrored magnitudes and random signs"""
    half = rng.uniform(0.1, 1.0, size=n // 2)
    middle = rng.uniform(0.1, 1.0, size=n % 2)
    magnitudes = np.concatenate([half, middle, half[::-1]])
    signs = rng.choice(np.array([-1.0, 1.0]), size=n)
    v = signs * magnitudes
    return v / np.linalg.norm(v)


def tridiagonal_to_block_form(T: TridiagonalMatrix, tol: float = 1e-10) -> Tuple[float, np.ndarray]:
    """
    Split a constant-diagonal tridiagonal into (gamma, B) so that the
    odd/even permutation of T is [[gamma*I, B], [B^T, gamma*I]]
    """
    gamma = float(np.mean(T.alphas))
    if np.max(np.abs(T.alphas - gamma)) > tol * max(T.norm(), 1.0):
        raise PreconditionError("tridiagonal diagonal is not constant")
    dense = T.to_dense()
    first, second = np.arange(0, T.size, 2), np.arange(1, T.size, 2)
    return gamma, dense[np.ix_(first, second)]


def _ones_minus_ones(n: int) -> np.ndarray:
    half = (n + 1) // 2
    v = np.concatenate([np.ones(half), -np.ones(n - half)])
    return v / math.sqrt(n)


def ritz_case(case: int, nd3k_path: Optional[Union[str, Path]] = None) -> Tuple[LinearOperator, np.ndarray]:
    """
    Operator and start vector of one of the four Ritz value cases

    1: lambda_i = i/50, v = 1/sqrt(50)              (symmetric spectrum, sav)
    2: lambda_i = 1/(51-i), v = 1/sqrt(50)          (asymmetric spectrum, sav)
    3: lambda_i = i/50, v proportional to (1..50)   (symmetric spectrum, no sav)
    4: sparse test matrix file, v = (1,..,1,-1,..,-1)/sqrt(n)
    """
    i = np.arange(1, CASE_DIM + 1, dtype=np.float64)
    uniform = np.full(CASE_DIM, 1.0 / math.sqrt(CASE_DIM))
    if case == 1:
        return generate_householder_matrix(i / CASE_DIM), uniform
    if case == 2:
        return generate_householder_matrix(1.0 / (CASE_DIM + 1 - i)), uniform
    if case == 3:
        return generate_householder_matrix(i / CASE_DIM), i / np.linalg.norm(i)
    if case == 4:
        if nd3k_path is None:
            raise InvalidInputError("case 4 needs the sparse test matrix path")
        A = read_matrix_market(nd3k_path)
        return A, _ones_minus_ones(A.dim)
    raise InvalidInputError(f"unknown case {case!r}; expected one of {CASES}")


def write_case_csvs(report: SymmetryReport, out_dir: Union[str, Path],
                    grid_points: int = DEFAULT_GRID_POINTS) -> List[Path]:
    """Write case<k>_nodes.csv and, when the measure is known, case<k>_measure.csv"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    case = report.case if report.case is not None else 0
    written = []

    nodes_path = out_dir / f'case{case}_nodes.csv'
    with open(nodes_path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(NODE_CSV_HEADER)
        for k, (theta, tau) in enumerate(zip(report.nodes, report.weights), start=1):
            writer.writerow([case, k, f'{theta:.17g}', f'{tau:.17g}'])
    written.append(nodes_path)

    if report.measure is not None:
        t, mu = measure_grid(report.measure, grid_points)
        measure_path = out_dir / f'case{case}_measure.csv'
        with open(measure_path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(MEASURE_CSV_HEADER)
            for ti, mi in zip(t, mu):
                writer.writerow([case, f'{ti:.17g}', f'{mi:.17g}'])
        written.append(measure_path)
    else:
        logger.warning(f"Case {case}: spectral measure unavailable, measure CSV skipped")

    logger.info(f"Case {case}: wrote {', '.join(p.name for p in written)}")
    return written


def run_appendix_cases(m: int = 9, out_dir: Optional[Union[str, Path]] = None,
                       nd3k_path: Optional[Union[str, Path]] = None,
                       cases=CASES, tol: float = DEFAULT_SYMMETRY_TOL,
                       cap: int = DEFAULT_ORACLE_CAP,
                       grid_points: int = DEFAULT_GRID_POINTS) -> List[SymmetryReport]:
    """
    Symmetry reports for the requested cases; case 4 is skipped with a
    notice when its matrix file is missing
    """
    reports = []
    for case in cases:
        if case == 4 and (nd3k_path is None or not Path(nd3k_path).is_file()):
            logger.warning(f"Case 4 skipped: matrix file not found ({nd3k_path})")
            continue
        A, v = ritz_case(case, nd3k_path)
        report = symmetry_report(A, v, m, tol=tol, cap=cap, case=case)
        if out_dir is not None:
            write_case_csvs(report, out_dir, grid_points)
        reports.append(report)
    return reports
