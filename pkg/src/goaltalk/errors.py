"""Exception hierarchy shared by all modules.

CLI exit codes: ConfigError -> 1, DataError -> 2, anything else -> 3.
"""


class GoaltalkError(Exception):
    pass


class ConfigError(GoaltalkError):
    """Invalid configuration value or combination."""


class DataError(GoaltalkError):
    """Malformed or incomplete input data (files, streams)."""


class ParseError(DataError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class TopicNotFoundError(GoaltalkError):
    """A topic id or label does not resolve in the graph."""


class EmptyCandidatesError(GoaltalkError):
    """A policy was asked to choose from an empty candidate set."""


class UndefinedMetricError(GoaltalkError):
    """A metric was requested over an empty record set."""


class UndefinedStateError(GoaltalkError):
    """An operation needs dialogue state that does not exist yet."""


class ContractViolationError(GoaltalkError):
    """An internal caller broke a documented precondition."""
