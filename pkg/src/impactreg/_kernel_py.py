"""Pure NumPy/SciPy implementation of the least-squares hot kernel.

The compiled extension ``impactreg._kernel`` exposes the same
``ols_sandwich`` signature; :mod:`impactreg.backend` picks one at import
time.  Keep the two implementations numerically aligned: both use a
column-pivoted QR factorization and identical rank detection.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import qr, solve_triangular

BACKEND_NAME = "python"


def ols_sandwich(X, y, rank_tol=1e-10, hc1=False):
    """Fit least squares and compute classical + sandwich covariance.

    Parameters
    ----------
    X : (n, p) design matrix (leading intercept column by convention).
    y : (n,) response.
    rank_tol : relative pivot tolerance; pivot j is zero when
        ``|R[j, j]| < rank_tol * |R[0, 0]|``.
    hc1 : scale the sandwich by n / (n - p).

    Returns
    -------
    (coef, resid, xtx_inv, classical, sandwich, rank, pivots)
    where all matrices are ``None`` when ``rank < p``; ``pivots`` is the
    column permutation chosen by the factorization (decreasing pivot
    magnitude), so ``pivots[rank]`` names a dependent column.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    n, p = X.shape
    Q, R, piv = qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(diag >= rank_tol * diag[0]))
    if rank < p:
        return None, None, None, None, None, rank, piv

    w = solve_triangular(R, Q.T @ y)
    coef = np.empty(p)
    coef[piv] = w
    resid = y - X @ coef

    r_inv = solve_triangular(R, np.eye(p))
    xtx_inv_perm = r_inv @ r_inv.T
    xtx_inv = np.empty((p, p))
    xtx_inv[np.ix_(piv, piv)] = xtx_inv_perm

    e2 = resid * resid
    meat = (X * e2[:, None]).T @ X
    sandwich = xtx_inv @ meat @ xtx_inv
    if hc1:
        sandwich *= n / (n - p)
    sandwich = 0.5 * (sandwich + sandwich.T)

    sigma2 = float(resid @ resid) / (n - p) if n > p else 0.0
    classical = sigma2 * xtx_inv
    classical = 0.5 * (classical + classical.T)
    return coef, resid, xtx_inv, classical, sandwich, rank, piv
