"""Exception types shared across the package."""


class ChannelSpecError(ValueError):
    """Malformed or invalid channel description."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SingularChannelError(ValueError):
    """The (Q, W) pair is singular; saddlepoint quantities are undefined."""


class DegenerateChannelError(ValueError):
    """The information density has zero variance (E0 is linear in rho)."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class BracketError(RuntimeError):
    """A root bracket has no sign change (target unreachable)."""


class OracleUnavailableError(RuntimeError):
    """The requested exact oracle cannot be evaluated at this size."""


class RegimeBoundaryError(ValueError):
    """Expansion evaluated too close to a regime boundary, where it diverges."""
