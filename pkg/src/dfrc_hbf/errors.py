"""Exception hierarchy shared by all modules."""

import numpy as np


class HybridBFError(Exception):
    """Base class for every error raised by this package."""


class NotHermitianError(HybridBFError, ValueError):
    pass


class NotPositiveDefiniteError(HybridBFError, np.linalg.LinAlgError):
    """Cholesky factorization failed.

    ``pivot`` is the zero-based index of the leading minor that is not
    positive definite (``None`` when it is not known).
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class NotPSDError(HybridBFError, ValueError):
    pass


class RankDeficientError(HybridBFError, np.linalg.LinAlgError):
    pass


class RetractionError(HybridBFError, ValueError):
    """A retraction hit a zero entry (circle) or a zero matrix (sphere)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateUpdateError(HybridBFError, ArithmeticError):
    pass


class InfeasibleBeamformerError(HybridBFError, ValueError):
    pass


class SolverError(HybridBFError, RuntimeError):
    """A solver failed; ``iteration`` records where."""

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"{message} (at iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class ConfigError(HybridBFError, ValueError):
    pass
