"""Exception hierarchy shared across the package."""


class SeisnoiseError(Exception):
    """Base class for all package errors."""


class ArgumentError(SeisnoiseError, ValueError):
    """An argument is outside the range an operation accepts."""


class DegenerateInputError(SeisnoiseError, ValueError):
    """The input carries no usable variation (constant series, singular design)."""


class EstimationError(SeisnoiseError, RuntimeError):
    """An optimizer failed to converge.

    ``best`` holds whatever the estimator had when it gave up, so callers can
    still inspect (or accept) a partially converged result.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ParseError(SeisnoiseError, ValueError):
    """A text input could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FetchError(SeisnoiseError, IOError):
    """Retrieving data from a web service failed or returned bad data."""
