"""Exception types shared across the toolkit."""


class DiarscoreError(ValueError):
    """Base class for all toolkit errors."""


class ParseError(DiarscoreError):
    """Malformed input file (carries a line number when one is known)."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(DiarscoreError):
    """Input parsed but violates a contract (bad value, wrong shape)."""


class SessionMismatchError(DiarscoreError):
    """Two inputs that must describe the same session do not."""


class UndefinedMetricError(DiarscoreError):
    """Metric denominator is zero (no reference speech / characters)."""


class InjectionError(DiarscoreError):
    """Requested corruption cannot be placed without interaction."""
