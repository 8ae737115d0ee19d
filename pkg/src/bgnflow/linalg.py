"""Linear solvers for cyclic banded systems.

A closed curve couples the first and last nodes, so the step matrix is
banded except for two small corner blocks.  ``solve_cyclic_banded`` factors
the banded part with LAPACK's partial-pivoting band LU and restores the
corners through a Woodbury correction.  ``solve_dense`` is the reference
route.
"""

import warnings

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgWarning, lapack, lu_factor, lu_solve

from .errors import SingularSystemError

PIVOT_TOL = 1e-13


def _norm_inf(A):
    if sp.issparse(A):
        return float(abs(A).sum(axis=1).max())
    return float(np.max(np.sum(np.abs(A), axis=1)))


def _lu(A):
    # exact zero pivots are reported through SingularSystemError instead
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        return lu_factor(A, check_finite=False)


def solve_dense(A, b):
    """LU solve with partial pivoting; tiny pivots raise ``SingularSystemError``."""
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    scale = _norm_inf(A)
    lu, piv = _lu(A)
    pivots = np.abs(np.diag(lu))
    if scale == 0.0 or pivots.min() < PIVOT_TOL * scale:
        i = int(np.argmin(pivots))
        raise SingularSystemError(f"pivot {pivots[i]:.3e} at row {i}, |A|={scale:.3e}")
    return lu_solve((lu, piv), b, check_finite=False)


class _BandLU:
    def __init__(self, n, kl, ku, rows, cols, vals, scale):
        ab = np.zeros((2 * kl + ku + 1, n))
        np.add.at(ab, (kl + ku + rows - cols, cols), vals)
        lu, piv, info = lapack.dgbtrf(ab, kl, ku)
        pivots = np.abs(lu[kl + ku])
        if info < 0:
            raise ValueError(f"dgbtrf argument error {info}")
        if info > 0 or pivots.min() < PIVOT_TOL * scale:
            i = int(np.argmin(pivots))
            raise SingularSystemError(
                f"band pivot {pivots[i]:.3e} at row {i}, |A|={scale:.3e}"
            )
        self.kl, self.ku, self.lu, self.piv = kl, ku, lu, piv

    def solve(self, rhs):
        x, info = lapack.dgbtrs(self.lu, self.kl, self.ku, rhs, self.piv)
        if info != 0:
            raise ValueError(f"dgbtrs argument error {info}")
        return x


def wrap_size(rows, cols, n, bandwidth):
    """Size ``r`` of the corner blocks holding every out-of-band entry."""
    d = cols - rows
    up = d > bandwidth
    lo = d < -bandwidth
    r = 0
    if np.any(up):
        r = max(r, int(rows[up].max()) + 1, int(n - cols[up].min()))
    if np.any(lo):
        r = max(r, int(n - rows[lo].min()), int(cols[lo].max()) + 1)
    return r


def solve_cyclic_banded(A, b, bandwidth):
    """Solve ``A z = b`` where ``A`` is banded up to two corner blocks.

    Splits ``A = B + U V^T`` with ``U = [G; 0; C2]``, ``V^T = [I, 0, G^-1 C1]``
    and ``G = -s I`` (``s`` the infinity norm of ``A``), so ``B`` has no
    corners, then applies the Woodbury identity.  The correction has rank
    equal to the corner block size.

    Parameters
    ----------
    A : sparse matrix, shape (n, n)
    b : ndarray, shape (n,) or (n, m)
    bandwidth : int
        Half-bandwidth of the non-wrapping part.
    """
    A = sp.coo_matrix(A)
    n = A.shape[0]
    rows, cols, vals = A.row.astype(np.int64), A.col.astype(np.int64), A.data
    scale = _norm_inf(A)
    if scale == 0.0:
        raise SingularSystemError("zero matrix")
    r = wrap_size(rows, cols, n, bandwidth)
    b = np.asarray(b, dtype=float)
    rhs = b.reshape(n, -1)
    if r == 0:
        lu = _BandLU(n, bandwidth, bandwidth, rows, cols, vals, scale)
        return lu.solve(rhs).reshape(b.shape)
    if r > bandwidth + 1 or n < 2 * r + bandwidth + 1:
        return solve_dense(A, b)

    band = np.abs(cols - rows) <= bandwidth
    C1 = np.zeros((r, r))
    C2 = np.zeros((r, r))
    up = ~band & (cols > rows)
    lo = ~band & (cols < rows)
    np.add.at(C1, (rows[up], cols[up] - (n - r)), vals[up])
    np.add.at(C2, (rows[lo] - (n - r), cols[lo]), vals[lo])

    # B = A - U V^T: +s on the leading diagonal, +C2 C1 / s on the trailing block
    shift = scale
    tail = C2 @ C1 / shift
    ti, tj = np.nonzero(tail)
    b_rows = np.concatenate([rows[band], np.arange(r), ti + n - r])
    b_cols = np.concatenate([cols[band], np.arange(r), tj + n - r])
    b_vals = np.concatenate([vals[band], np.full(r, shift), tail[ti, tj]])
    lu = _BandLU(n, bandwidth, bandwidth, b_rows, b_cols, b_vals, scale)

    U = np.zeros((n, r))
    U[:r] = -shift * np.eye(r)
    U[n - r:] = C2
    Y = lu.solve(np.hstack([rhs, U]))
    y, Z = Y[:, : rhs.shape[1]], Y[:, rhs.shape[1]:]

    def vt(M):
        return M[:r] - C1 @ M[n - r:] / shift

    cap = np.eye(r) + vt(Z)
    cap_lu, cap_piv = _lu(cap)
    cap_pivots = np.abs(np.diag(cap_lu))
    if cap_pivots.min() < PIVOT_TOL * max(1.0, _norm_inf(cap)):
        raise SingularSystemError(
            f"Woodbury capacitance pivot {cap_pivots.min():.3e}; matrix singular"
        )
    z = y - Z @ lu_solve((cap_lu, cap_piv), vt(y), check_finite=False)
    return z.reshape(b.shape)


def relative_residual(A, z, b):
    """``|Az - b| / (|A| |z| + |b|)`` in the infinity norm."""
    res = A @ z - b
    denom = _norm_inf(A) * np.max(np.abs(z)) + np.max(np.abs(b))
    return float(np.max(np.abs(res)) / denom) if denom > 0 else float(np.max(np.abs(res)))
