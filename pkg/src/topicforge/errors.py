"""Exception hierarchy shared across the toolkit.

The CLI maps error families to exit codes: 1 for configuration problems,
2 for bad input data, 3 for numeric failures.  Plain ``ValueError`` is
reserved for programming errors (violated function preconditions).
"""


class TopicforgeError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2


class ConfigError(TopicforgeError):
    """Invalid configuration file, unknown keys, or out-of-range values."""

    exit_code = 1


class DataError(TopicforgeError):
    """Bad or missing input data: corpora, embedding files, services."""

    exit_code = 2


class EmptyInputError(DataError):
    """An input that must be non-empty was empty."""


class EmbeddingFormatError(DataError):
    """File does not start with the TFEMB1 magic or has a malformed header."""


class EmbeddingCorruptionError(DataError):
    """Payload size disagrees with the declared header."""


class ValidationError(DataError):
    """Values violate a declared invariant, e.g. non-finite floats."""


class ServiceError(DataError):
    """Embedding service kept failing after the configured retries."""


class NumericError(TopicforgeError):
    """A numeric routine failed to converge or produced invalid output."""

    exit_code = 3


class PipelineError(TopicforgeError):
    """A pipeline stage failed.

    Carries the stage name and inherits the exit code of the underlying
    cause so scripted callers can branch on it.
    """

    def __init__(self, stage: str, message: str, exit_code: int = 2):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.exit_code = exit_code
