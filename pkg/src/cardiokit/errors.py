"""Exception types shared across the toolkit.

The CLI maps any CardiokitError to exit code 1; everything else is a bug.
"""


class CardiokitError(Exception):
    """Base class for all domain errors raised by cardiokit."""


class ParseError(CardiokitError):
    """Malformed input file (ragged CSV row, unreadable document, ...)."""


class ConfigurationError(CardiokitError):
    """Invalid schema or dataset configuration (e.g. missing label column)."""


class EncodingError(CardiokitError):
    """A cell value cannot be encoded under the attribute schema."""


class SplitError(CardiokitError):
    """Train/test split cannot satisfy its contract."""


class FoldError(CardiokitError):
    """Fold plan cannot satisfy its contract (e.g. k exceeds minority count)."""


class SelectionError(CardiokitError):
    """Invalid feature-selection request (bad index, schema mismatch, ...)."""


class HyperparameterError(CardiokitError):
    """Hyperparameter outside its allowed range."""


class TrainingError(CardiokitError):
    """A learner cannot be fitted on the given data."""


class PredictionError(CardiokitError):
    """A prediction request is inconsistent with the trained model."""


class EvaluationError(CardiokitError):
    """Metric or cross-validation input violates a precondition."""


class ModelFormatError(CardiokitError):
    """Persisted model document is invalid or does not match its schema."""
