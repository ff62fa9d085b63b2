"""Dense symmetric linear algebra helpers.

Only two things are needed by the estimators: a Cholesky factorisation that
tolerates the (numerically) rank-deficient Gram matrices smooth kernels
produce, and the weighted norm ``||L^T v||_2`` used by the analytic
coefficient update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveSemidefiniteError, ShapeError

# Relative diagonal jitter escalation, applied as ``jitter * mean(diag)``.
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8, 1e-6)

SYMMETRY_RTOL = 1e-8


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor ``L`` with the diagonal jitter actually added.

    Satisfies ``L @ L.T == M + jitter * I`` up to floating-point noise, where
    ``M`` is the matrix that was factorised.
    """

    matrix: np.ndarray
    jitter: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def cholesky_psd(m: np.ndarray) -> CholeskyFactor:
    """Factor a symmetric positive-semidefinite matrix, escalating jitter.

    Tries ``jitter = 0, 1e-12, 1e-10, 1e-8, 1e-6`` (times the mean diagonal)
    and returns the factor for the first level at which LAPACK succeeds.

    Raises:
        ShapeError: ``m`` is not square or is visibly asymmetric.
        NotPositiveSemidefiniteError: factorisation fails at every level.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > SYMMETRY_RTOL * scale:
        raise ShapeError(f"matrix is asymmetric (max |M - M^T| = {asym:.3g})")
    if m.size == 0:
        return CholeskyFactor(matrix=m.copy(), jitter=0.0)

    sym = 0.5 * (m + m.T)
    mean_diag = float(np.mean(np.diag(sym)))
    if not mean_diag > 0.0:
        mean_diag = 1.0
    eye = np.eye(sym.shape[0])
    for level in JITTER_LADDER:
        jitter = level * mean_diag
        try:
            factor = np.linalg.cholesky(sym + jitter * eye)
        except np.linalg.LinAlgError:
            continue
        return CholeskyFactor(matrix=factor, jitter=jitter)
    raise NotPositiveSemidefiniteError(
        "matrix is not positive semidefinite within tolerance "
        f"(failed at jitter {JITTER_LADDER[-1]:g} * mean diagonal)"
    )


def weighted_norm(factor: CholeskyFactor, v: np.ndarray) -> float:
    """``||L^T v||_2``, i.e. ``sqrt(v^T (M + jitter I) v)`` for the source M."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (factor.dim,):
        raise ShapeError(
            f"vector of length {v.shape} does not match factor dimension {factor.dim}"
        )
    return float(np.linalg.norm(factor.matrix.T @ v))
