"""
Sparse direct solves.
"""

import logging
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_norm, splu

from ..errors import LinearAlgebraError
from ..performance import track_performance

logger = logging.getLogger(__name__)

_DENSE_PIVOT_LIMIT = 2000


def _empty_pivot(matrix: sp.csr_matrix) -> Optional[int]:
    """First structurally empty row or column, if any."""
    rows = np.flatnonzero(np.diff(matrix.tocsr().indptr) == 0)
    cols = np.flatnonzero(np.diff(matrix.tocsc().indptr) == 0)
    candidates = [int(x[0]) for x in (rows, cols) if len(x)]
    return min(candidates) if candidates else None


def _singular_pivot(matrix: sp.csc_matrix) -> Optional[int]:
    """Pivot index of a singular matrix: an empty row/column, else a dense LU check."""
    pivot = _empty_pivot(matrix)
    if pivot is not None or matrix.shape[0] > _DENSE_PIVOT_LIMIT:
        return pivot
    _, _, upper = scipy.linalg.lu(matrix.toarray())
    diag = np.abs(np.diag(upper))
    small = np.flatnonzero(diag <= np.finfo(float).eps * max(diag.max(), 1.0) * len(diag))
    return int(small[0]) if len(small) else None


@track_performance("factorization")
def sparse_lu_solve(matrix, rhs, symmetric: bool = False) -> np.ndarray:
    """
    Solve ``matrix @ x = rhs`` with SuperLU.

    ``symmetric`` selects SuperLU's symmetric mode (diagonal pivots
    preferred, A+Aᵀ ordering), suited to the saddle-point Newton systems;
    the general path uses COLAMD column ordering with partial pivoting.
    Raises ``LinearAlgebraError`` on a singular factorization.
    """
    matrix = sp.csc_matrix(matrix, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n, m = matrix.shape
    if n != m:
        raise LinearAlgebraError(f"matrix must be square, got {matrix.shape}")
    if rhs.shape[0] != n:
        raise LinearAlgebraError(f"right-hand side has length {rhs.shape[0]}, expected {n}")
    pivot = _empty_pivot(matrix)
    if pivot is not None:
        raise LinearAlgebraError("matrix is structurally singular", pivot=pivot)

    if symmetric:
        options = {"permc_spec": "MMD_AT_PLUS_A", "diag_pivot_thresh": 0.0, "options": {"SymmetricMode": True}}
    else:
        options = {"permc_spec": "COLAMD"}
    try:
        lu = splu(matrix, **options)
    except RuntimeError as e:
        raise LinearAlgebraError(f"singular factorization: {e}", pivot=_singular_pivot(matrix)) from e

    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise LinearAlgebraError("factorization produced non-finite values")

    scale = sparse_norm(matrix, np.inf) * np.linalg.norm(x, np.inf) + np.linalg.norm(rhs, np.inf)
    defect = np.linalg.norm(matrix @ x - rhs, np.inf)
    if scale > 0 and defect > 1e-10 * scale:
        logger.warning("linear solve residual %.3e exceeds 1e-10 relative to %.3e", defect, scale)
    return x
