"""
Exception hierarchy for the SLQ log-determinant toolkit
Every error raised on purpose derives from SLQError
"""
from typing import Optional


class SLQError(Exception):
    """Base class for all toolkit errors"""


class InvalidInputError(SLQError, ValueError):
    """Argument or file content failed validation"""


class MalformedInputError(InvalidInputError):
    """Unparseable input, optionally pinned to a line number"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class UnsupportedFormatError(InvalidInputError):
    """Well-formed input declaring a format we do not handle"""


class OracleTooLargeError(InvalidInputError):
    """Dense oracle requested for a matrix above the configured cap"""

    def __init__(self, dim: int, cap: int):
        self.dim = dim
        self.cap = cap
        super().__init__(f"dense oracle refused: dimension {dim} exceeds cap {cap}")


class PreconditionError(SLQError, ValueError):
    """A hypothesis required by the requested operation does not hold"""


class InvalidRegimeError(SLQError, ValueError):
    """The requested bound is not applicable to these parameters"""


class DegenerateSpectrumError(InvalidRegimeError):
    """lambda_min == lambda_max; the ellipse radius is undefined"""


class UndefinedTargetError(InvalidRegimeError):
    """Relative target cannot be converted (logdet is zero)"""


class NoInteriorMinimizerError(SLQError):
    """The error-allocation objective has no admissible stationary point"""


class NumericalFailureError(SLQError, ArithmeticError):
    """Non-finite values or an iteration that failed to converge"""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message)


class NotSPDError(NumericalFailureError):
    """A nonpositive eigenvalue, Ritz value or quadrature node was met"""

    def __init__(self, message: str, query_index: Optional[int] = None):
        self.query_index = query_index
        super().__init__(message, index=query_index)


class DomainError(NumericalFailureError):
    """Scalar function evaluated outside its domain"""


EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code"""
    if isinstance(exc, NumericalFailureError):
        return EXIT_NUMERICAL
    if isinstance(exc, (InvalidInputError, PreconditionError, InvalidRegimeError,
                        NoInteriorMinimizerError)):
        return EXIT_INVALID
    return 1
