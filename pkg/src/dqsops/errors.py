"""Exception types shared across the scoring pipeline."""


class DqError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(DqError):
    """A configuration value violates its documented constraint."""


class ParseError(DqError):
    """A stream or artifact file could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class EmptySample(DqError):
    """A statistic was requested on an empty sample."""


class InvalidDistribution(DqError):
    """A probability vector has negative mass or does not sum to one."""


class LengthMismatch(DqError):
    """Two vectors that must have equal length do not."""


class MissingMetaInformation(DqError):
    """A dimension scorer needs a fitted artifact that was not supplied."""

    def __init__(self, dimension: str, what: str):
        super().__init__(f"dimension '{dimension}' requires {what}")
        self.dimension = dimension


class InsufficientData(DqError):
    """Too few values to fit an estimator."""


class DegenerateData(DqError):
    """The data admits no meaningful fit (for example zero spread)."""


class TooFewRows(DqError):
    """A matrix operation needs more rows than were provided."""


class ConvergenceFailure(DqError):
    """An iterative solver did not reach its tolerance."""


class DimensionMismatch(DqError):
    """A score vector does not match the fitted dimension order."""


class PlanInfeasible(DqError):
    """A mutation plan cannot be realised on a window of the given size."""


class InsufficientTrainingData(DqError):
    """Too few records to train the surrogate model."""


class DegenerateTarget(DqError):
    """All training targets are identical; regression is undefined."""


class FeatureVersionMismatch(DqError):
    """A model was trained against a different feature layout."""


class EmptyEvaluation(DqError):
    """The oracle was invoked with no prediction pairs."""


class InitializationBudgetExhausted(DqError):
    """Initialization ran out of windows before reaching the tolerance.

    Carries the best result achieved so the caller can still persist and
    inspect it.
    """

    def __init__(self, message: str, best_result=None):
        super().__init__(message)
        self.best_result = best_result
