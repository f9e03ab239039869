"""Exception hierarchy shared across the package."""


class QvsumError(Exception):
    """Base class for all package errors."""


class DimensionError(QvsumError):
    """Tensor shapes are incompatible for the requested operation."""


class VocabularyError(QvsumError):
    """A token id falls outside the configured vocabulary."""


class ConfigurationError(QvsumError):
    """Model or service configuration is inconsistent."""


class DataError(QvsumError):
    """Dataset content violates a documented invariant."""


class TrainingError(QvsumError):
    """Training aborted (non-finite loss or gradient)."""


class EvaluationError(QvsumError):
    """Evaluation requested on an empty or malformed result set."""
