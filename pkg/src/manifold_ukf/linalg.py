"""Small dense linear-algebra helpers for covariance handling."""

from __future__ import annotations

import numpy as np

from .errors import ContractViolationError, FactorizationError, NotPSDError

# Eigenvalues are accepted as "nonnegative" down to -PSD_TOL * max(1, |lambda|_max).
PSD_TOL = 1e-10
# Symmetry is required up to SYM_TOL * (1 + |P|_max).
SYM_TOL = 1e-12


def symmetrize(mat: np.ndarray) -> np.ndarray:
    """Return (M + M^T) / 2."""
    return 0.5 * (mat + mat.T)


def check_symmetric(mat: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate squareness and symmetry; returns the array as float ndarray."""
    arr = np.asarray(mat, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ContractViolationError(f"{name} must be square, got shape {arr.shape}")
    scale = 1.0 + (np.abs(arr).max() if arr.size else 0.0)
    if np.abs(arr - arr.T).max(initial=0.0) > SYM_TOL * scale:
        raise ContractViolationError(f"{name} is not symmetric")
    return arr


def check_psd(mat: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate symmetry and positive semidefiniteness (up to tolerance)."""
    arr = check_symmetric(mat, name)
    if arr.size == 0:
        return arr
    eigs = np.linalg.eigvalsh(arr)
    floor = -PSD_TOL * max(1.0, float(eigs[-1]))
    if eigs[0] < floor:
        raise NotPSDError(
            f"{name} has eigenvalue {eigs[0]:.3e} below the PSD tolerance",
            min_eigenvalue=float(eigs[0]),
        )
    return arr


def sqrt_psd(mat: np.ndarray, name: str = "covariance") -> np.ndarray:
    """Square root S of a PSD matrix with S @ S.T == mat.

    Plain Cholesky first (exact for positive-definite input), then Cholesky
    of ``mat + jitter*I`` with jitter = 1e-12 * trace/n and once more at
    1e-9 * trace/n. Exactly singular PSD inputs (rank deficiency, the zero
    matrix) fall back to a symmetric eigendecomposition root with negative
    eigenvalues clamped to zero; inputs that fail the PSD check raise.
    """
    arr = check_psd(mat, name)
    n = arr.shape[0]
    if n == 0:
        return arr.copy()
    scale = float(np.trace(arr)) / n
    eye = np.eye(n)
    for jitter in (0.0, 1e-12 * scale, 1e-9 * scale):
        try:
            return np.linalg.cholesky(arr + jitter * eye)
        except np.linalg.LinAlgError:
            continue
    try:
        eigs, vecs = np.linalg.eigh(arr)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh on finite input
        raise FactorizationError(f"could not factor {name}") from exc
    return vecs * np.sqrt(np.clip(eigs, 0.0, None))


def min_eigenvalue(mat: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(np.linalg.eigvalsh(symmetrize(np.asarray(mat, dtype=float)))[0])


def spd_solve(mat: np.ndarray, rhs: np.ndarray, condition_limit: float = 1e12):
    """Solve ``mat @ x = rhs`` for symmetric positive-definite ``mat``.

    Returns (solution, condition_number). The caller decides what to do when
    the condition number exceeds its limit; this helper only reports it, and
    raises ``np.linalg.LinAlgError`` for exactly singular input.
    """
    sym = symmetrize(np.asarray(mat, dtype=float))
    eigs = np.linalg.eigvalsh(sym)
    lo, hi = float(eigs[0]), float(eigs[-1])
    if lo <= 0.0:
        condition = np.inf
    else:
        condition = hi / lo
    if not np.isfinite(condition) or condition > condition_limit:
        return None, condition
    return np.linalg.solve(sym, rhs), condition
