"""
CSD-SVM error types.

Every module raises one of these so the CLI can map failures onto its
exit-code contract:

  DataError       -> exit 2  (bad input, bad flags, dimension mismatch)
  NumericalError  -> exit 3  (linear system could not be solved to tolerance)
"""

EXIT_OK = 0
EXIT_DATA_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


class CsdError(Exception):
    """Base class for all CSD-SVM errors."""

    exit_code = EXIT_DATA_ERROR


class DataError(CsdError, ValueError):
    """Input violates a documented contract (shape, range, format, flag)."""

    exit_code = EXIT_DATA_ERROR


class NumericalError(CsdError, ArithmeticError):
    """A linear solve failed or missed its residual tolerance."""

    exit_code = EXIT_NUMERICAL_ERROR

    def __init__(self, message, condition=None, residual=None):
        self.condition = condition
        self.residual = residual
        details = []
        if condition is not None:
            details.append(f"condition estimate {condition:.3e}")
        if residual is not None:
            details.append(f"relative residual {residual:.3e}")
        if details:
            message = f"{message} ({', '.join(details)})"
        super().__init__(message)
