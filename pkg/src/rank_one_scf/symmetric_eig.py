"""
Dense symmetric eigensolver utilities.

``sym_eig_full`` calls LAPACK's divide-and-conquer symmetric driver (``syevd``:
Householder tridiagonalization, then divide and conquer on the tridiagonal
matrix) through ``scipy.linalg.eigh``. J has only sum(I_n) rows, so a full
dense decomposition per iteration is affordable.
"""

import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from .constants import RQI_CONDITION_LIMIT, RQI_SHIFT_PERTURBATION, SYMMETRY_RTOL
from .exceptions import EigenConvergenceError, NonSymmetricMatrixError
from .utils import get_logger

logger = get_logger(__name__)

# relative gap under which +mu and -mu count as a tie
TIE_RTOL = 1.0e-12


@dataclass(frozen=True, eq=False)
class EigPair:
    """Eigenvalue and unit eigenvector."""

    value: float
    vector: np.ndarray


@dataclass(frozen=True, eq=False)
class RqiOutcome:
    """Result of one Rayleigh quotient iteration step."""

    accepted: bool
    vector: Optional[np.ndarray]
    shift: float
    reason: str = ""


def _check_symmetric(S: np.ndarray) -> np.ndarray:
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NonSymmetricMatrixError(f"Expected a square matrix, got shape {S.shape}")
    scale = float(np.max(np.abs(S))) if S.size else 0.0
    asym = float(np.max(np.abs(S - S.T))) if S.size else 0.0
    if asym > SYMMETRY_RTOL * scale:
        raise NonSymmetricMatrixError(
            f"Matrix is not symmetric: max |S - S^T| = {asym:.3e}",
            details={"max_abs": scale},
        )
    return S


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so that its largest-magnitude entry is positive."""
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def sym_eig_full(S: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Full eigendecomposition of a dense symmetric matrix.

    Args:
        S: Symmetric matrix

    Returns:
        (w, V): eigenvalues in ascending order and orthonormal eigenvectors as columns

    Raises:
        NonSymmetricMatrixError: If S fails the symmetry check
        EigenConvergenceError: If LAPACK does not converge
    """
    S = _check_symmetric(S)
    try:
        w, V = scipy.linalg.eigh(S, driver="evd")
    except scipy.linalg.LinAlgError as e:
        raise EigenConvergenceError(f"Symmetric eigensolver did not converge: {str(e)}")
    return w, V


def largest_magnitude_eigenpair(S: np.ndarray) -> EigPair:
    """
    Eigenpair of largest |eigenvalue|.

    A tie between +mu and -mu goes to the positive eigenvalue; the vector is
    sign-canonicalized so that its largest-magnitude entry is positive.
    """
    w, V = sym_eig_full(S)
    top, bottom = float(w[-1]), float(w[0])
    if abs(bottom) > abs(top) * (1.0 + TIE_RTOL):
        index = 0
    else:
        index = w.size - 1
    return EigPair(value=float(w[index]), vector=canonical_sign(V[:, index].copy()))


def _shifted_solve(S: np.ndarray, x: np.ndarray, shift: float) -> Optional[np.ndarray]:
    """Solve (S - shift I) y = x with a symmetric-indefinite factorization; None if unsafe."""
    shifted = S - shift * np.eye(S.shape[0])
    with np.errstate(all='ignore'):
        cond = np.linalg.cond(shifted)
    if not np.isfinite(cond) or cond > RQI_CONDITION_LIMIT:
        return None
    with warnings.catch_warnings():
        warnings.simplefilter('error', scipy.linalg.LinAlgWarning)
        try:
            y = scipy.linalg.solve(shifted, x, assume_a='sym')
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning, ValueError):
            return None
    return y if np.all(np.isfinite(y)) else None


def rayleigh_quotient_step(S: np.ndarray, x: np.ndarray) -> RqiOutcome:
    """
    One Rayleigh quotient iteration step.

    rho = x'Sx / x'x, y = (S - rho I)^{-1} x, y / |y|. A near-singular shift is
    retried once with rho * (1 + 1e-10); a second failure is a rejection, and the
    caller keeps its previous vector.
    """
    S = _check_symmetric(S)
    x = np.asarray(x, dtype=np.float64).ravel()
    rho = float(x @ S @ x / (x @ x))

    y = _shifted_solve(S, x, rho)
    shift = rho
    if y is None:
        bump = RQI_SHIFT_PERTURBATION * (abs(rho) if rho != 0.0 else np.linalg.norm(S))
        shift = rho + bump
        logger.debug("Singular RQI shift %.6e, retrying with %.6e", rho, shift)
        y = _shifted_solve(S, x, shift)
    if y is None:
        return RqiOutcome(accepted=False, vector=None, shift=shift, reason="singular shift")

    norm = float(np.linalg.norm(y))
    if norm == 0.0 or not np.isfinite(norm):
        return RqiOutcome(accepted=False, vector=None, shift=shift, reason="zero solve")
    return RqiOutcome(accepted=True, vector=y / norm, shift=shift)
