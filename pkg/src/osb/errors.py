"""Exception hierarchy shared by every module of the package."""


class OSBError(Exception):
    """Base class for solver errors."""


class UsageError(OSBError, ValueError):
    """Bad arguments: out-of-range coordinate, missing fixed point, malformed config."""


class DomainError(OSBError, ValueError):
    """The operator was evaluated outside its domain.

    ``coordinate`` is the output coordinate whose formula failed and
    ``values`` holds the offending inputs.
    """

    def __init__(self, message, coordinate=None, values=None):
        super().__init__(message)
        self.coordinate = coordinate
        self.values = values


class DivergenceError(OSBError, ArithmeticError):
    """A run produced non-finite state or left the operator's domain mid-run.

    ``trace`` is attached by the run loops so callers keep the samples
    recorded up to the failure.
    """

    def __init__(self, message, step=None, coordinate=None, point=None):
        super().__init__(message)
        self.step = step
        self.coordinate = coordinate
        self.point = point
        self.trace = None


class MatrixMarketError(OSBError, ValueError):
    """Unparseable or unsupported Matrix Market input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
