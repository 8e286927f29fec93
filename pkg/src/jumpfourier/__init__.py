"""Algebraic reconstruction of piecewise smooth periodic functions from
their Fourier coefficients: jump locations and magnitudes first, then the
smooth remainder."""

from .errors import (AccuracyError, ConditioningError, ConfigurationError, ConvergenceError,
                     IllPosedError, LocalizationInfeasibleError, MatchingError, NumericalError,
                     ReconstructionError, StageError, UnsupportedDegreeError, WindowRangeError)
from .model import (FourierWindow, Jump, SingularPart, SmoothPart, TestFunction, basis_V,
                    exact_fourier, fourier_window, synth_random)
from .eckhoff import JumpEstimate, resolve_jump
from .pipeline import ReconstructionConfig, ReconstructionResult, error_report, reconstruct

__version__ = "0.1.0"
