"""Exception types shared across the package."""


class SpcpError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SpcpError, ValueError):
    """Array shapes are inconsistent with the requested operation."""


class NumericalError(SpcpError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy result."""


class PowerIterationError(NumericalError):
    """Power iteration hit its iteration cap before the tolerance.

    Carries the best iterate found so far in ``u``, ``sigma``, ``v``.
    """

    def __init__(self, message, u=None, sigma=None, v=None):
        super().__init__(message)
        self.u = u
        self.sigma = sigma
        self.v = v


class MatrixIOError(SpcpError):
    """Matrix file could not be read or written; ``code`` identifies why."""

    code = "io_error"


class MalformedHeaderError(MatrixIOError):
    code = "malformed_header"


class TruncatedPayloadError(MatrixIOError):
    code = "truncated_payload"


class NonFiniteDataError(MatrixIOError):
    code = "non_finite_data"
