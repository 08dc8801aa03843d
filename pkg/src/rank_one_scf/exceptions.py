"""
Custom exceptions for the rank-one approximation package.
"""

from typing import Optional, Any, Dict


class RankOneError(Exception):
    """Base exception for all rank-one approximation errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigurationError(RankOneError, ValueError):
    """Raised when solver or experiment settings are invalid."""
    pass


class TensorShapeError(RankOneError, ValueError):
    """Raised when tensor, vector or factor shapes do not fit together."""
    pass


class ModeError(RankOneError, ValueError):
    """Raised when a mode index is out of range or repeated."""
    pass


class TensorFileError(RankOneError):
    """Raised when a .dt1 tensor file cannot be read or written."""
    pass


class DegenerateFactorError(RankOneError):
    """Raised when a zero-norm factor shows up where a unit factor is required."""

    def __init__(self, message: str, modes: Optional[list] = None,
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.modes = list(modes or [])


class NonSymmetricMatrixError(RankOneError, ValueError):
    """Raised when the symmetric eigensolver receives a non-symmetric matrix."""
    pass


class EigenConvergenceError(RankOneError):
    """Raised when the dense eigensolver fails to converge."""
    pass


class SolverFailureError(RankOneError):
    """Raised when a solver fails after its single automatic restart."""
    pass


class GreedyAbortError(RankOneError):
    """Raised when an inner solve of the greedy driver fails."""
    pass
