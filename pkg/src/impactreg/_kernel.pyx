# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled least-squares hot kernel (column-pivoted QR via LAPACK).

Mirrors :mod:`impactreg._kernel_py`; the two must stay numerically
aligned (same factorization, same rank rule).  The per-row sandwich
"meat" accumulation is the loop this extension exists for.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_lapack cimport dgeqp3, dormqr, dtrtri, dtrtrs

cnp.import_array()

BACKEND_NAME = "compiled"


def ols_sandwich(X, y, double rank_tol=1e-10, bint hc1=False):
    """See ``impactreg._kernel_py.ols_sandwich`` for the contract."""
    cdef cnp.ndarray[double, ndim=2] Xc = np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] yc = np.ascontiguousarray(y, dtype=np.float64)
    cdef int n = Xc.shape[0]
    cdef int p = Xc.shape[1]

    cdef cnp.ndarray[double, ndim=2, mode="fortran"] A = np.asfortranarray(Xc)
    cdef cnp.ndarray[int, ndim=1] jpvt = np.zeros(p, dtype=np.intc)
    cdef cnp.ndarray[double, ndim=1] tau = np.empty(p, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] work
    cdef double wq
    cdef int lwork = -1
    cdef int info = 0

    dgeqp3(&n, &p, &A[0, 0], &n, &jpvt[0], &tau[0], &wq, &lwork, &info)
    lwork = <int> wq
    work = np.empty(lwork, dtype=np.float64)
    dgeqp3(&n, &p, &A[0, 0], &n, &jpvt[0], &tau[0], &work[0], &lwork, &info)
    if info != 0:
        raise RuntimeError(f"dgeqp3 failed with info={info}")

    cdef cnp.ndarray[long, ndim=1] piv = np.empty(p, dtype=np.int64)
    cdef int j
    for j in range(p):
        piv[j] = jpvt[j] - 1  # LAPACK pivots are 1-based

    cdef double r00 = A[0, 0] if A[0, 0] >= 0 else -A[0, 0]
    cdef double rjj
    cdef int rank = 0
    if r00 > 0.0:
        for j in range(p):
            rjj = A[j, j] if A[j, j] >= 0 else -A[j, j]
            if rjj >= rank_tol * r00:
                rank += 1
            else:
                break
    if rank < p:
        return None, None, None, None, None, rank, piv

    # q^T y, then solve R w = (q^T y)[:p]
    cdef cnp.ndarray[double, ndim=1] qty = yc.copy()
    cdef char side = b'L'
    cdef char trans = b'T'
    cdef int one = 1
    lwork = -1
    dormqr(&side, &trans, &n, &one, &p, &A[0, 0], &n, &tau[0], &qty[0], &n,
           &wq, &lwork, &info)
    lwork = <int> wq
    if lwork > work.shape[0]:
        work = np.empty(lwork, dtype=np.float64)
    dormqr(&side, &trans, &n, &one, &p, &A[0, 0], &n, &tau[0], &qty[0], &n,
           &work[0], &lwork, &info)
    if info != 0:
        raise RuntimeError(f"dormqr failed with info={info}")

    cdef char uplo = b'U'
    cdef char no_trans = b'N'
    cdef char diag = b'N'
    cdef cnp.ndarray[double, ndim=1] w_sol = qty[:p].copy()
    dtrtrs(&uplo, &no_trans, &diag, &p, &one, &A[0, 0], &n, &w_sol[0], &p, &info)
    if info != 0:
        raise RuntimeError(f"dtrtrs failed with info={info}")

    cdef cnp.ndarray[double, ndim=1] coef = np.empty(p, dtype=np.float64)
    for j in range(p):
        coef[piv[j]] = w_sol[j]

    cdef cnp.ndarray[double, ndim=1] resid = yc - Xc.dot(coef)

    # invert R in place, then (X^T X)^-1 = P R^-1 R^-T P^T
    dtrtri(&uplo, &diag, &p, &A[0, 0], &n, &info)
    if info != 0:
        raise RuntimeError(f"dtrtri failed with info={info}")
    cdef cnp.ndarray[double, ndim=2] r_inv = np.triu(np.asarray(A)[:p, :p])
    cdef cnp.ndarray[double, ndim=2] xtx_inv_perm = r_inv.dot(r_inv.T)
    cdef cnp.ndarray[double, ndim=2] xtx_inv = np.empty((p, p), dtype=np.float64)
    cdef int i, k
    for j in range(p):
        for k in range(p):
            xtx_inv[piv[j], piv[k]] = xtx_inv_perm[j, k]

    # meat = X^T diag(e^2) X, accumulated row by row (the hot loop)
    cdef cnp.ndarray[double, ndim=2] meat = np.zeros((p, p), dtype=np.float64)
    cdef double e2
    cdef double rss = 0.0
    for i in range(n):
        e2 = resid[i] * resid[i]
        rss += e2
        for j in range(p):
            for k in range(j, p):
                meat[j, k] += e2 * Xc[i, j] * Xc[i, k]
    for j in range(p):
        for k in range(j + 1, p):
            meat[k, j] = meat[j, k]

    cdef cnp.ndarray[double, ndim=2] sandwich = xtx_inv.dot(meat).dot(xtx_inv)
    if hc1:
        sandwich *= n / <double> (n - p)
    sandwich = 0.5 * (sandwich + sandwich.T)

    cdef double sigma2 = rss / (n - p) if n > p else 0.0
    cdef cnp.ndarray[double, ndim=2] classical = sigma2 * xtx_inv
    classical = 0.5 * (classical + classical.T)
    return coef, resid, xtx_inv, classical, sandwich, rank, piv
