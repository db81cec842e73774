"""
Exception hierarchy for the fair-ranking toolkit.

Every class carries the exit code the CLI reports for it:
0 ok, 1 usage, 2 data-format, 3 validation, 4 degenerate-metric.
"""

from typing import Optional


class FairRankError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class UsageError(FairRankError, ValueError):
    """Bad command-line usage or missing required input."""

    exit_code = 1


class InvalidParameterError(UsageError):
    """An evaluation or reranking parameter is outside its allowed range."""


class ConfigError(UsageError):
    """A parameter file is unreadable, has unknown keys or holds a value of the wrong type."""


class DataFormatError(FairRankError, ValueError):
    """
    A file could not be parsed or violates its format.

    Errors about one record carry its line. Errors about the whole file,
    such as an empty one, carry only the path.

    Args:
        message: What went wrong
        path: File the error was found in, if any
        line: 1-based line number, if known
    """

    exit_code = 2

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.message = message
        self.path = path
        self.line = line
        super().__init__(self._render())

    def _render(self) -> str:
        if self.path and self.line:
            return f"{self.path}:{self.line}: {self.message}"
        if self.path:
            return f"{self.path}: {self.message}"
        return self.message


class DataIntegrityError(DataFormatError):
    """Referenced data is missing (document metadata, relevance judgments)."""


class ValidationError(FairRankError, ValueError):
    """A value breaks a domain invariant (e.g. ranking is not a permutation)."""

    exit_code = 3


class InvalidRankingError(ValidationError):
    """A ranking is not an exact permutation of its request's pool."""


class ProtocolError(ValidationError):
    """
    A run does not follow the evaluation protocol.

    Args:
        message: What went wrong
        sequence_id: Sequence the offending entry belongs to
        position: 1-based position in that sequence
    """

    def __init__(self, message: str, sequence_id: Optional[str] = None, position: Optional[int] = None):
        self.sequence_id = sequence_id
        self.position = position
        if sequence_id is not None and position is not None:
            message = f"sequence {sequence_id} position {position}: {message}"
        super().__init__(message)


class ContractViolation(ValidationError):
    """Caller passed arguments that break an operation's contract."""


class DegenerateTotalsError(FairRankError, ArithmeticError):
    """Total exposure or total relevance is zero, so shares are undefined."""

    exit_code = 4
