"""Exception types raised across the package."""


class PauliStabError(Exception):
    """Base class for all errors raised by paulistab."""


class PoleHit(PauliStabError, ZeroDivisionError):
    """A transfer element was evaluated at (or numerically on top of) a pole."""

    def __init__(self, message, s=None):
        super().__init__(message)
        self.s = s


class InvalidRange(PauliStabError, ValueError):
    """Frequency limits, counts or orders outside their admissible range."""


class SingularQuaternion(PauliStabError, ZeroDivisionError):
    """A quaternion (2x2 dq matrix) with vanishing semi-norm was inverted."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class Singular(PauliStabError, ZeroDivisionError):
    """Direct 2x2 matrix inverse of a singular matrix."""


class UnderResolved(PauliStabError):
    """The frequency trace is too coarse to count encirclements reliably."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class Unsolvable(PauliStabError):
    """The steady-state operating point has no solution."""


class AssemblyError(PauliStabError):
    """State-space blocks with inconsistent dimensions."""


class ParseError(PauliStabError, ValueError):
    """Malformed configuration or frequency-response file."""

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field


class ValidationError(PauliStabError, ValueError):
    """A parsed value violates a parameter invariant."""

    def __init__(self, field, message=None):
        super().__init__(field if message is None else f"{field}: {message}")
        self.field = field


class NonMonotonicFrequency(PauliStabError, ValueError):
    """Frequency column is not strictly increasing."""


class FrequencyMismatch(PauliStabError, ValueError):
    """Two measured data sets do not share the same frequency column."""
