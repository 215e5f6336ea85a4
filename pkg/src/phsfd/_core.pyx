# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled core for the hot kernels.

Twin of the numpy fallback in ``_core_py``: identical contracts, same
getrf/gecon/getrs local solve and the same BiCGSTAB recursion, with the
inner loops lowered to C.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from scipy.linalg.cython_lapack cimport dgecon, dgetrf, dgetrs

from .errors import DegenerateStencilError

BACKEND_NAME = "compiled"

RCOND_MIN = float(np.finfo(np.float64).eps / 1.0e-3)
BREAKDOWN = 1.0e-300

cdef double RCOND_MIN_C = RCOND_MIN
cdef double BREAKDOWN_C = BREAKDOWN


cdef inline double ipow(double x, long e) noexcept nogil:
    cdef double out = 1.0
    cdef long i
    for i in range(e):
        out *= x
    return out


def weight_systems(xy, members, exponents):
    """Solve the augmented local system for every stencil.

    Same contract as the fallback: returns (weights, scales,
    multipliers) and raises DegenerateStencilError when the 1-norm
    condition estimate of a local matrix crosses the threshold.
    """
    cdef double[:, ::1] xy_v = np.ascontiguousarray(xy, dtype=np.float64)
    cdef cnp.int64_t[:, ::1] mem_v = np.ascontiguousarray(members, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] exp_v = np.ascontiguousarray(exponents, dtype=np.int64)

    cdef Py_ssize_t s_count = mem_v.shape[0]
    cdef int n = <int> mem_v.shape[1]
    cdef int m_count = <int> exp_v.shape[0]
    cdef int q = n + m_count

    weights_arr = np.empty((s_count, n))
    scales_arr = np.empty(s_count)
    mult_arr = np.empty((s_count, m_count))
    cdef double[:, ::1] weights = weights_arr
    cdef double[::1] scales = scales_arr
    cdef double[:, ::1] mults = mult_arr

    # Reusable scratch: column-major q*q matrix plus LAPACK work areas.
    cdef double[::1] a = np.empty(q * q)
    cdef double[::1] bvec = np.empty(q)
    cdef double[::1] lx = np.empty(n)
    cdef double[::1] ly = np.empty(n)
    cdef double[::1] rj = np.empty(n)
    cdef double[::1] work = np.empty(4 * q)
    cdef int[::1] ipiv = np.empty(q, dtype=np.intc)
    cdef int[::1] iwork = np.empty(q, dtype=np.intc)

    cdef Py_ssize_t s
    cdef int j, k, l, row, col, info, nrhs
    cdef long node, a_e, b_e
    cdef double cx, cy, rho, inv_rho, inv_rho2, dxx, dyy, d, v
    cdef double anorm, colsum, rcond
    cdef char norm_one = b'1'
    cdef char trans_n = b'N'

    for s in range(s_count):
        node = mem_v[s, 0]
        cx = xy_v[node, 0]
        cy = xy_v[node, 1]
        rho = 0.0
        for j in range(n):
            lx[j] = xy_v[mem_v[s, j], 0] - cx
            ly[j] = xy_v[mem_v[s, j], 1] - cy
            rj[j] = sqrt(lx[j] * lx[j] + ly[j] * ly[j])
            if rj[j] > rho:
                rho = rj[j]
        if rho <= 0.0:
            raise DegenerateStencilError(node, 0.0)
        inv_rho = 1.0 / rho
        for j in range(n):
            lx[j] *= inv_rho
            ly[j] *= inv_rho
            rj[j] *= inv_rho

        # Kernel block (symmetric, zero diagonal).
        for j in range(n):
            a[j + j * q] = 0.0
            for k in range(j):
                dxx = lx[j] - lx[k]
                dyy = ly[j] - ly[k]
                d = sqrt(dxx * dxx + dyy * dyy)
                v = d * d * d
                a[j + k * q] = v
                a[k + j * q] = v
        # Monomial block and its transpose.
        for l in range(m_count):
            a_e = exp_v[l, 0]
            b_e = exp_v[l, 1]
            for j in range(n):
                v = ipow(lx[j], a_e) * ipow(ly[j], b_e)
                a[j + (n + l) * q] = v
                a[(n + l) + j * q] = v
        for l in range(m_count):
            for k in range(m_count):
                a[(n + l) + (n + k) * q] = 0.0

        for j in range(n):
            bvec[j] = 9.0 * rj[j]
        for l in range(m_count):
            a_e = exp_v[l, 0]
            b_e = exp_v[l, 1]
            if (a_e == 2 and b_e == 0) or (a_e == 0 and b_e == 2):
                bvec[n + l] = 2.0
            else:
                bvec[n + l] = 0.0

        anorm = 0.0
        for col in range(q):
            colsum = 0.0
            for row in range(q):
                colsum += fabs(a[row + col * q])
            if colsum > anorm:
                anorm = colsum

        info = 0
        dgetrf(&q, &q, &a[0], &q, &ipiv[0], &info)
        if info != 0:
            raise DegenerateStencilError(node, 0.0)
        rcond = 0.0
        dgecon(&norm_one, &q, &a[0], &q, &anorm, &rcond, &work[0], &iwork[0], &info)
        if info != 0 or not (rcond >= RCOND_MIN_C):
            raise DegenerateStencilError(node, rcond)
        nrhs = 1
        dgetrs(&trans_n, &q, &nrhs, &a[0], &q, &ipiv[0], &bvec[0], &q, &info)
        if info != 0:
            raise DegenerateStencilError(node, rcond)

        inv_rho2 = inv_rho * inv_rho
        for j in range(n):
            weights[s, j] = bvec[j] * inv_rho2
        scales[s] = rho
        for l in range(m_count):
            mults[s, l] = bvec[n + l]

    return weights_arr, scales_arr, mult_arr


cdef void _matvec(
    cnp.int64_t[::1] indptr,
    cnp.int64_t[::1] indices,
    double[::1] data,
    double[::1] x,
    double[::1] out,
) noexcept nogil:
    cdef Py_ssize_t i, jj
    cdef double acc
    for i in range(indptr.shape[0] - 1):
        acc = 0.0
        for jj in range(indptr[i], indptr[i + 1]):
            acc += data[jj] * x[indices[jj]]
        out[i] = acc


cdef double _dot(double[::1] u, double[::1] v) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(u.shape[0]):
        acc += u[i] * v[i]
    return acc


cdef double _norm(double[::1] u) noexcept nogil:
    return sqrt(_dot(u, u))


def csr_matvec(indptr, indices, data, x):
    """y = A @ x for CSR-stored A."""
    cdef cnp.int64_t[::1] indptr_v = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.int64_t[::1] indices_v = np.ascontiguousarray(indices, dtype=np.int64)
    cdef double[::1] data_v = np.ascontiguousarray(data, dtype=np.float64)
    cdef double[::1] x_v = np.ascontiguousarray(x, dtype=np.float64)
    out_arr = np.empty(indptr_v.shape[0] - 1)
    cdef double[::1] out = out_arr
    _matvec(indptr_v, indices_v, data_v, x_v, out)
    return out_arr


def bicgstab(indptr, indices, data, b, x0, double tol, long max_iter):
    """Unpreconditioned BiCGSTAB on a CSR matrix.

    Same stopping and restart semantics as the fallback: the recursive
    residual triggers a true-residual check, breakdown restarts once.
    Returns (x, iterations, relative_residual, converged).
    """
    cdef cnp.int64_t[::1] indptr_v = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.int64_t[::1] indices_v = np.ascontiguousarray(indices, dtype=np.int64)
    cdef double[::1] data_v = np.ascontiguousarray(data, dtype=np.float64)
    b_arr = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[::1] b_v = b_arr
    cdef Py_ssize_t size = b_v.shape[0]
    if indptr_v.shape[0] != size + 1:
        raise ValueError(
            f"matrix has {indptr_v.shape[0] - 1} rows, rhs has {size}"
        )
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    if x_arr.shape[0] != size:
        raise ValueError(f"initial guess length {x_arr.shape[0]} != rhs length {size}")
    cdef double[::1] x = x_arr

    cdef double[::1] r = np.empty(size)
    cdef double[::1] r_shadow = np.empty(size)
    cdef double[::1] v = np.zeros(size)
    cdef double[::1] p = np.zeros(size)
    cdef double[::1] s = np.empty(size)
    cdef double[::1] t = np.empty(size)
    cdef double[::1] scratch = np.empty(size)

    cdef double bnorm = _norm(b_v)
    cdef double denom = bnorm if bnorm > 0.0 else 1.0
    cdef double rho = 1.0, alpha = 1.0, omega = 1.0
    cdef double rho_new, beta, rv, tt, relres, snorm
    cdef bint restarted = False
    cdef long iteration = 0
    cdef Py_ssize_t i

    _matvec(indptr_v, indices_v, data_v, x, scratch)
    for i in range(size):
        r[i] = b_v[i] - scratch[i]
    relres = _norm(r) / denom
    if relres <= tol:
        return x_arr, 0, relres, True
    for i in range(size):
        r_shadow[i] = r[i]

    while iteration < max_iter:
        iteration += 1
        rho_new = _dot(r_shadow, r)
        if fabs(rho_new) < BREAKDOWN_C or fabs(omega) < BREAKDOWN_C:
            if restarted:
                break
            restarted = True
            _restart(indptr_v, indices_v, data_v, b_v, x, r, r_shadow, v, p, scratch)
            rho = 1.0
            alpha = 1.0
            omega = 1.0
            rho_new = _dot(r_shadow, r)
            if fabs(rho_new) < BREAKDOWN_C:
                break
        beta = (rho_new / rho) * (alpha / omega)
        for i in range(size):
            p[i] = r[i] + beta * (p[i] - omega * v[i])
        _matvec(indptr_v, indices_v, data_v, p, v)
        rv = _dot(r_shadow, v)
        if fabs(rv) < BREAKDOWN_C:
            if restarted:
                break
            restarted = True
            _restart(indptr_v, indices_v, data_v, b_v, x, r, r_shadow, v, p, scratch)
            rho = 1.0
            alpha = 1.0
            omega = 1.0
            continue
        alpha = rho_new / rv
        for i in range(size):
            s[i] = r[i] - alpha * v[i]
        snorm = _norm(s) / denom
        if snorm <= tol:
            for i in range(size):
                x[i] = x[i] + alpha * p[i]
            relres = _true_relres(indptr_v, indices_v, data_v, b_v, x, scratch, denom)
            if relres <= tol:
                return x_arr, iteration, relres, True
            _restart(indptr_v, indices_v, data_v, b_v, x, r, r_shadow, v, p, scratch)
            rho = 1.0
            alpha = 1.0
            omega = 1.0
            continue
        _matvec(indptr_v, indices_v, data_v, s, t)
        tt = _dot(t, t)
        omega = _dot(t, s) / tt if tt > 0.0 else 0.0
        for i in range(size):
            x[i] = x[i] + alpha * p[i] + omega * s[i]
            r[i] = s[i] - omega * t[i]
        rho = rho_new
        if _norm(r) / denom <= tol:
            relres = _true_relres(indptr_v, indices_v, data_v, b_v, x, scratch, denom)
            if relres <= tol:
                return x_arr, iteration, relres, True

    relres = _true_relres(indptr_v, indices_v, data_v, b_v, x, scratch, denom)
    return x_arr, iteration, relres, False


cdef double _true_relres(
    cnp.int64_t[::1] indptr,
    cnp.int64_t[::1] indices,
    double[::1] data,
    double[::1] b,
    double[::1] x,
    double[::1] scratch,
    double denom,
) noexcept nogil:
    cdef Py_ssize_t i
    _matvec(indptr, indices, data, x, scratch)
    for i in range(b.shape[0]):
        scratch[i] = b[i] - scratch[i]
    return _norm(scratch) / denom


cdef void _restart(
    cnp.int64_t[::1] indptr,
    cnp.int64_t[::1] indices,
    double[::1] data,
    double[::1] b,
    double[::1] x,
    double[::1] r,
    double[::1] r_shadow,
    double[::1] v,
    double[::1] p,
    double[::1] scratch,
) noexcept nogil:
    cdef Py_ssize_t i
    _matvec(indptr, indices, data, x, scratch)
    for i in range(b.shape[0]):
        r[i] = b[i] - scratch[i]
        r_shadow[i] = r[i]
        v[i] = 0.0
        p[i] = 0.0
