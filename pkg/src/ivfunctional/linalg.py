"""Small dense matrix kernel: operator norm and pivoted inversion."""

from __future__ import annotations

import numpy as np

from ivfunctional import kernels

PIVOT_TOL = 1e-12
POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000
_POWER_SEED = 0x5EED5EED


class SingularMatrixError(np.linalg.LinAlgError):
    """A pivot fell below the tolerance during elimination."""


def _as_matrix(a, square=True) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def spectral_norm(a, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> float:
    """Largest singular value via power iteration on ``A^T A``.

    The starting vectors come from a fixed seed, so the result is a
    deterministic function of ``a``.
    """
    a = _as_matrix(a, square=False)
    return float(kernels.spectral_norm(a, float(tol), int(max_iter), _POWER_SEED))


def invert(a, tol: float = PIVOT_TOL) -> np.ndarray:
    """Inverse by Gauss-Jordan elimination with partial pivoting.

    Raises SingularMatrixError if any pivot magnitude is below ``tol``.
    """
    if not tol > 0:
        raise ValueError("pivot tolerance must be positive")
    a = _as_matrix(a)
    inv = kernels.invert(a, float(tol))
    if inv is None:
        raise SingularMatrixError(f"pivot below {tol:g}: matrix is numerically singular")
    return inv


def matvec(a, x) -> np.ndarray:
    return np.asarray(a, dtype=np.float64) @ np.asarray(x, dtype=np.float64)
