"""Input validation helpers shared by the estimators and simulators."""

from __future__ import annotations

import numpy as np

PSD_TOL = 1e-9


def as_matrix(M, name: str) -> np.ndarray:
    """Coerce to a 2-D float array, rejecting non-finite entries."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def as_vector(x, name: str, dim: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"{name} must have length {dim}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def check_square(M: np.ndarray, name: str) -> np.ndarray:
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    return M


def check_symmetric_psd(M: np.ndarray, name: str, tol: float = PSD_TOL) -> np.ndarray:
    """Require M = M^T with eigenvalues >= -tol."""
    check_square(M, name)
    if not np.allclose(M, M.T, atol=1e-10):
        raise ValueError(f"{name} must be symmetric")
    eigs = np.linalg.eigvalsh(M)
    if eigs.min() < -tol:
        raise ValueError(f"{name} must be positive semi-definite (min eig {eigs.min():.3e})")
    return M


def check_probability(p: float, name: str) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {p}")
    return p
