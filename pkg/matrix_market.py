"""
Matrix Market coordinate-format reader and writer
Only real symmetric matrices are accepted (general files must be symmetric)
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import IO, List, Optional, Union

import numpy as np

from errors import MalformedInputError, UnsupportedFormatError

logger = logging.getLogger(__name__)

BANNER = '%%matrixmarket'
SUPPORTED_FIELDS = ('real', 'integer', 'double')
SUPPORTED_SYMMETRY = ('symmetric', 'general')


@dataclass
class MatrixMarketHeader:
    """Parsed banner and size line"""
    object_type: str
    storage: str
    field: str
    symmetry: str
    rows: int = 0
    cols: int = 0
    entries: int = 0


@dataclass
class CoordinateEntries:
    """Raw 0-based triplets exactly as stored in the file"""
    header: MatrixMarketHeader
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray


class MatrixMarketReader:
    """Context-managed reader for coordinate Matrix Market files"""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._handle: Optional[IO[str]] = None
        self._line_number = 0

    def __enter__(self):
        self.open()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    def open(self) -> None:
        try:
            self._handle = open(self.path, 'r', encoding='utf-8')
            self._line_number = 0
            logger.info(f"Opened Matrix Market file: {self.path}")
        except OSError as e:
            logger.error(f"Failed to open Matrix Market file {self.path}: {e}")
            raise

    def close(self) -> None:
        if self._handle:
            self._handle.close()
            self._handle = None

    def _next_line(self) -> Optional[str]:
        line = self._handle.readline()
        if not line:
            return None
        self._line_number += 1
        return line

    def read_header(self) -> MatrixMarketHeader:
        """Parse the banner line and the size line"""
        if not self._handle:
            raise RuntimeError("Matrix Market file not open")

        banner = self._next_line()
        if banner is None:
            raise MalformedInputError("empty file, missing %%MatrixMarket banner", 1)
        tokens = banner.strip().lower().split()
        if len(tokens) != 5 or tokens[0] != BANNER:
            raise MalformedInputError(f"bad banner: {banner.strip()!r}", self._line_number)

        header = MatrixMarketHeader(*tokens[1:])
        if header.object_type != 'matrix' or header.storage != 'coordinate':
            raise UnsupportedFormatError(
                f"only 'matrix coordinate' files are supported, got '{header.object_type} {header.storage}'")
        if header.field not in SUPPORTED_FIELDS:
            raise UnsupportedFormatError(f"field '{header.field}' is not supported (real symmetric only)")
        if header.symmetry not in SUPPORTED_SYMMETRY:
            raise UnsupportedFormatError(f"symmetry '{header.symmetry}' is not supported")

        line = self._next_line()
        while line is not None and (not line.strip() or line.lstrip().startswith('%')):
            line = self._next_line()
        if line is None:
            raise MalformedInputError("missing size line", self._line_number + 1)

        parts = line.split()
        try:
            header.rows, header.cols, header.entries = (int(p) for p in parts)
        except ValueError:
            raise MalformedInputError(f"bad size line: {line.strip()!r}", self._line_number)
        if header.rows < 0 or header.cols < 0 or header.entries < 0:
            raise MalformedInputError("negative sizes in size line", self._line_number)
        if header.rows != header.cols:
            raise UnsupportedFormatError(f"matrix is not square: {header.rows}x{header.cols}")
        return header

    def read_entries(self) -> CoordinateEntries:
        """Read every coordinate entry after the header"""
        header = self.read_header()
        rows: List[int] = []
        cols: List[int] = []
        values: List[float] = []

        while True:
            line = self._next_line()
            if line is None:
                break
            text = line.strip()
            if not text or text.startswith('%'):
                continue
            parts = text.split()
            if len(parts) != 3:
                raise MalformedInputError(f"expected 'row col value', got {text!r}", self._line_number)
            try:
                i, j, value = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise MalformedInputError(f"unparseable entry {text!r}", self._line_number)
            if not (1 <= i <= header.rows and 1 <= j <= header.cols):
                raise MalformedInputError(f"index ({i}, {j}) outside {header.rows}x{header.cols}",
                                          self._line_number)
            if not np.isfinite(value):
                raise MalformedInputError(f"non-finite value {parts[2]!r}", self._line_number)
            rows.append(i - 1)
            cols.append(j - 1)
            values.append(value)

        if len(values) != header.entries:
            raise MalformedInputError(
                f"size line declares {header.entries} entries, found {len(values)}", self._line_number)

        logger.info(f"Read {len(values)} entries of a {header.rows}x{header.cols} {header.symmetry} matrix")
        return CoordinateEntries(header=header,
                                 rows=np.asarray(rows, dtype=np.int64),
                                 cols=np.asarray(cols, dtype=np.int64),
                                 values=np.asarray(values, dtype=np.float64))


def write_matrix_market(matrix, path: Union[str, Path], comment: str = '') -> None:
    """Write the lower triangle of a symmetric scipy.sparse or dense matrix"""
    import scipy.sparse as sps

    lower = sps.tril(sps.coo_array(matrix)).tocoo()
    order = np.lexsort((lower.row, lower.col))
    n = matrix.shape[0]
    with open(path, 'w', encoding='utf-8') as f:
        f.write('%%MatrixMarket matrix coordinate real symmetric\n')
        if comment:
            f.write(f'% {comment}\n')
        f.write(f'{n} {n} {lower.nnz}\n')
        for k in order:
            f.write(f'{lower.row[k] + 1} {lower.col[k] + 1} {lower.data[k]:.17g}\n')
    logger.info(f"Wrote {lower.nnz} lower-triangle entries to {path}")
