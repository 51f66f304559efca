"""
Dense complex matrix kernel.

LU based solve, determinant and inverse, plus the cofactor-minor route for
single inverse elements. Operation indices are 1-based; conversion to numpy's
0-based indexing happens once, at the top of each public function.
"""

import logging
import warnings

import numpy as np
import scipy.linalg

from config import PIVOT_RTOL
from errors import DimensionMismatch, IndexOutOfRange, SingularMatrix

logger = logging.getLogger(__name__)


def as_complex_matrix(a, name="matrix"):
    """Return `a` as a finite complex128 2-D array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionMismatch(f"{name} has non-finite entries")
    return m


def _square(a, name="matrix"):
    m = as_complex_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")
    return m


def max_row_norm(a):
    if a.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(a), axis=1)))


def lu_factor(a):
    """
    Partial-pivoting LU factorization with the singularity rule applied:
    a pivot below PIVOT_RTOL * max-row-norm raises SingularMatrix.
    """
    m = _square(a)
    scale = max_row_norm(m)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    pivots = np.abs(np.diag(lu))
    smallest = float(pivots.min()) if pivots.size else 0.0
    if scale == 0.0 or smallest < PIVOT_RTOL * scale:
        logger.debug(f"singular pivot {smallest:.3e} against row norm {scale:.3e}")
        raise SingularMatrix(
            f"pivot {smallest:.3e} below {PIVOT_RTOL:g} x row norm {scale:.3e}",
            pivot=smallest,
        )
    return lu, piv


def lu_solve(a, b):
    """Solve A x = b; `b` may be a vector or an n x m block of right-hand sides."""
    m = _square(a)
    rhs = np.asarray(b, dtype=np.complex128)
    if rhs.shape[0] != m.shape[0]:
        raise DimensionMismatch(f"right-hand side has {rhs.shape[0]} rows, matrix has {m.shape[0]}")
    factor = lu_factor(m)
    return scipy.linalg.lu_solve(factor, rhs, check_finite=False)


def det(a):
    """Determinant as product of LU pivots times the permutation sign."""
    m = _square(a)
    n = m.shape[0]
    if n == 0:
        return complex(1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    swaps = int(np.count_nonzero(piv != np.arange(n)))
    sign = -1.0 if swaps % 2 else 1.0
    return complex(sign * np.prod(np.diag(lu)))


def inverse(a):
    m = _square(a)
    return lu_solve(m, np.eye(m.shape[0], dtype=np.complex128))


def _check_index(n, i, name):
    if not (1 <= i <= n):
        raise IndexOutOfRange(f"{name}={i} outside [1, {n}]")


def minor_det(a, i, j):
    """Determinant of A with row i and column j deleted (1-based)."""
    m = _square(a)
    n = m.shape[0]
    if n < 2:
        raise IndexOutOfRange(f"minor of a {n}x{n} matrix is undefined")
    _check_index(n, i, "i")
    _check_index(n, j, "j")
    sub = np.delete(np.delete(m, i - 1, axis=0), j - 1, axis=1)
    return det(sub)


def inverse_element_cofactor(a, i, j):
    """(A^-1)_ij = (-1)^(i+j) det(M_ji) / det(A), computed without forming A^-1."""
    m = _square(a)
    n = m.shape[0]
    _check_index(n, i, "i")
    _check_index(n, j, "j")
    lu_factor(m)
    d = det(m)
    if n == 1:
        return complex(1.0 / d)
    sign = -1.0 if (i + j) % 2 else 1.0
    return complex(sign * minor_det(m, j, i) / d)


def cofactor_inverse(a):
    """Full inverse assembled element by element from cofactors. O(n^5)."""
    m = _square(a)
    n = m.shape[0]
    out = np.empty((n, n), dtype=np.complex128)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            out[i - 1, j - 1] = inverse_element_cofactor(m, i, j)
    return out


def condition_number(a):
    """Infinity-norm condition number; inf when the pivot rule rejects A."""
    m = _square(a)
    try:
        inv = inverse(m)
    except SingularMatrix:
        return float("inf")
    return max_row_norm(m) * max_row_norm(inv)


def hermiticity_defect(a):
    """max |A_ij - conj(A_ji)|."""
    m = _square(a)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))
