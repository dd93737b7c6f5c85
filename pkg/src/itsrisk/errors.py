"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes: validation problems exit 2,
data problems 3, network problems 4.
"""


class ItsRiskError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ItsRiskError):
    """A record, config value, or argument violates its invariants."""


class DataError(ItsRiskError):
    """Stored or supplied data is missing, malformed, or inconsistent."""


class MissingScoreError(DataError):
    """A record has no usable base score; run the predictor first."""


class ParseError(DataError):
    """A fixture or feed file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class NetworkError(ItsRiskError):
    """A remote source failed after retries or a fixture had no match."""
