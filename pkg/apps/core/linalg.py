"""
Small dense linear-algebra helpers shared by the estimator and CRB apps.
"""

import numpy as np
from scipy import linalg

from django.conf import settings


def rank_tolerance():
    """Relative singular-value threshold from settings (default 1e-10)."""
    return settings.INERTIAL_ARRAY['RANK_TOLERANCE']


def numerical_rank(matrix, rel_tol=None):
    """
    Rank counted as singular values above rel_tol times the largest one.

    Returns 0 for empty or all-zero matrices.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.size == 0:
        return 0
    rel_tol = rank_tolerance() if rel_tol is None else rel_tol
    singular_values = linalg.svd(matrix, compute_uv=False)
    if singular_values[0] == 0.0:
        return 0
    return int(np.sum(singular_values > rel_tol * singular_values[0]))


def spd_inverse(matrix):
    """
    Invert a symmetric positive definite matrix through its Cholesky factor.

    Raises:
        np.linalg.LinAlgError: If the matrix is not positive definite.
    """
    factor = linalg.cho_factor(matrix, lower=True)
    inverse = linalg.cho_solve(factor, np.eye(matrix.shape[0]))
    return 0.5 * (inverse + inverse.T)


def symmetrize(matrix):
    """Return (M + M') / 2."""
    return 0.5 * (matrix + matrix.T)
