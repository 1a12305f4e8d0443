"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: usage problems exit 2, data problems
exit 3.
"""


class ReliefBenchError(Exception):
    """Base class for all package errors."""


class UsageError(ReliefBenchError):
    """Bad algorithm string, bad parameter, or bad configuration."""


class ConfigError(UsageError):
    """A requested column or option does not exist."""


class SpecError(UsageError):
    """A generator specification cannot be realized."""


class DataError(ReliefBenchError):
    """The data itself violates a precondition."""


class ParseError(DataError):
    """Malformed delimited input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NotApplicableError(ReliefBenchError):
    """Method cannot be run on this kind of data (e.g. chi-square on a
    continuous endpoint)."""
