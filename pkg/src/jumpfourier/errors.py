"""Exception hierarchy shared by all stages."""


class ReconstructionError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(ReconstructionError, ValueError):
    """Invalid user input: infeasible geometry, bad ranges, missing data."""


class UnsupportedDegreeError(ConfigurationError):
    """Requested polynomial degree is above the tabulated bound."""


class WindowRangeError(ConfigurationError, IndexError):
    """A coefficient index lies outside the available window."""


class NumericalError(ReconstructionError, ArithmeticError):
    """A computation ran but could not deliver a trustworthy answer."""


class ConvergenceError(NumericalError):
    """Iterative root finder did not converge.

    Attributes
    ----------
    best : list
        Best iterate found.
    residuals : list
        Normalized residuals at ``best``.
    """

    def __init__(self, message, best=None, residuals=None):
        super().__init__(message)
        self.best = best
        self.residuals = residuals


class ConditioningError(NumericalError):
    """Data make a stage numerically degenerate (vanishing leading term, overflow)."""


class IllPosedError(NumericalError):
    """Linear system condition number above the accepted threshold."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class AccuracyError(NumericalError):
    """Estimates fail an a-posteriori acceptance test; a larger M may help."""


class LocalizationInfeasibleError(NumericalError):
    """Coarse jump estimates are too close for disjoint bumps."""


class MatchingError(NumericalError):
    """Estimated and true jumps cannot be paired unambiguously."""


class StageError(NumericalError):
    """Wraps a failure in one pipeline stage.

    Attributes
    ----------
    stage : str
        Name of the failing stage.
    partial : dict
        Results produced by the stages that completed.
    cause : Exception
        The original error.
    """

    def __init__(self, stage, cause, partial=None):
        super().__init__(f"{stage} stage failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial = partial or {}
