"""Numpy/LAPACK fallback for the hot kernels.

Mirrors the compiled core in `_core.pyx`: same getrf/gecon/getrs local
solve with the same degeneracy threshold, and the same stabilised
bi-conjugate-gradient iteration with single-restart breakdown handling.
"""

import numpy as np
from scipy.linalg import lapack

from .errors import DegenerateStencilError

BACKEND_NAME = "python"

# Local systems whose 1-norm condition estimate exceeds eps/1e-3 are
# rejected as degenerate.
RCOND_MIN = np.finfo(np.float64).eps / 1.0e-3

BREAKDOWN = 1.0e-300


def weight_systems(xy, members, exponents):
    """Solve the augmented local system for every stencil.

    Parameters
    ----------
    xy : (N, 2) node positions.
    members : (S, n) int64 stencil rows; column 0 is the center node.
    exponents : (M, 2) int64 monomial exponents.

    Returns
    -------
    weights : (S, n) second-order operator weights in original coordinates.
    scales : (S,) per-stencil conditioning radius rho.
    multipliers : (S, M) polynomial multipliers of the scaled solve.
    """
    xy = np.ascontiguousarray(xy, dtype=np.float64)
    members = np.ascontiguousarray(members, dtype=np.int64)
    exponents = np.ascontiguousarray(exponents, dtype=np.int64)
    s_count, n = members.shape
    m_count = exponents.shape[0]
    q = n + m_count

    weights = np.empty((s_count, n))
    scales = np.empty(s_count)
    multipliers = np.empty((s_count, m_count))

    ea = exponents[:, 0].astype(np.float64)
    eb = exponents[:, 1].astype(np.float64)
    rhs_poly = np.zeros(m_count)
    rhs_poly[(exponents[:, 0] == 2) & (exponents[:, 1] == 0)] = 2.0
    rhs_poly[(exponents[:, 0] == 0) & (exponents[:, 1] == 2)] = 2.0

    for s in range(s_count):
        pts = xy[members[s]]
        local = pts - pts[0]
        r_center = np.sqrt(local[:, 0] ** 2 + local[:, 1] ** 2)
        rho = r_center.max()
        if rho <= 0.0:
            raise DegenerateStencilError(members[s, 0], 0.0)
        local = local / rho

        diff = local[:, None, :] - local[None, :, :]
        dist = np.sqrt(diff[:, :, 0] ** 2 + diff[:, :, 1] ** 2)
        a = np.zeros((q, q), order="F")
        a[:n, :n] = dist * dist * dist
        # Monomial block p_l(xi_j); 0**0 == 1 under numpy float power.
        p = local[:, 0:1] ** ea[None, :] * local[:, 1:2] ** eb[None, :]
        a[:n, n:] = p
        a[n:, :n] = p.T

        b = np.empty(q)
        b[:n] = 9.0 * (r_center / rho)
        b[n:] = rhs_poly

        anorm = np.abs(a).sum(axis=0).max()
        lu, piv, info = lapack.dgetrf(a, overwrite_a=True)
        rcond = 0.0
        if info == 0:
            rcond, _ = lapack.dgecon(lu, anorm, norm="1")
        if info != 0 or not (rcond >= RCOND_MIN):
            raise DegenerateStencilError(members[s, 0], rcond)
        sol, info = lapack.dgetrs(lu, piv, b)
        if info != 0:
            raise DegenerateStencilError(members[s, 0], rcond)

        weights[s] = sol[:n] / (rho * rho)
        scales[s] = rho
        multipliers[s] = sol[n:]

    return weights, scales, multipliers


def csr_matvec(indptr, indices, data, x):
    """y = A @ x for CSR-stored A."""
    prod = data * x[indices]
    y = np.add.reduceat(prod, indptr[:-1])
    # reduceat misreads empty rows; none occur here (every row has a
    # diagonal or stencil entry) but guard anyway.
    empty = indptr[:-1] == indptr[1:]
    if empty.any():
        y[empty] = 0.0
    return y


def bicgstab(indptr, indices, data, b, x0, tol, max_iter):
    """Unpreconditioned BiCGSTAB on a CSR matrix.

    Stops once the true relative residual |b - Ax| / |b| drops to ``tol``
    (the cheap recursive residual only triggers the check).  A rho/omega
    breakdown restarts the recursion once from the current iterate; a
    second breakdown reports non-convergence.

    Returns (x, iterations, relative_residual, converged).
    """
    b = np.asarray(b, dtype=np.float64)
    if indptr.shape[0] != b.shape[0] + 1:
        raise ValueError(f"matrix has {indptr.shape[0] - 1} rows, rhs has {b.shape[0]}")
    x = np.array(x0, dtype=np.float64, copy=True)
    if x.shape != b.shape:
        raise ValueError(f"initial guess length {x.shape[0]} != rhs length {b.shape[0]}")

    bnorm = float(np.linalg.norm(b))
    denom = bnorm if bnorm > 0.0 else 1.0

    def true_relres():
        return float(np.linalg.norm(b - csr_matvec(indptr, indices, data, x))) / denom

    r = b - csr_matvec(indptr, indices, data, x)
    relres = float(np.linalg.norm(r)) / denom
    if relres <= tol:
        return x, 0, relres, True

    # Recursion state; p = v = 0 makes the first direction update
    # collapse to p = r without special-casing.
    r_shadow = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    restarted = False

    def restart():
        nonlocal r, r_shadow, rho, alpha, omega
        r = b - csr_matvec(indptr, indices, data, x)
        r_shadow = r.copy()
        rho = alpha = omega = 1.0
        v[:] = 0.0
        p[:] = 0.0

    iteration = 0
    while iteration < max_iter:
        iteration += 1
        rho_new = float(r_shadow @ r)
        if abs(rho_new) < BREAKDOWN or abs(omega) < BREAKDOWN:
            if restarted:
                return x, iteration, true_relres(), False
            restarted = True
            restart()
            rho_new = float(r_shadow @ r)
            if abs(rho_new) < BREAKDOWN:
                return x, iteration, true_relres(), False
        beta = (rho_new / rho) * (alpha / omega)
        p = r + beta * (p - omega * v)
        v = csr_matvec(indptr, indices, data, p)
        rv = float(r_shadow @ v)
        if abs(rv) < BREAKDOWN:
            if restarted:
                return x, iteration, true_relres(), False
            restarted = True
            restart()
            continue
        alpha = rho_new / rv
        s = r - alpha * v
        if float(np.linalg.norm(s)) / denom <= tol:
            x = x + alpha * p
            relres = true_relres()
            if relres <= tol:
                return x, iteration, relres, True
            restart()
            continue
        t = csr_matvec(indptr, indices, data, s)
        tt = float(t @ t)
        omega = float(t @ s) / tt if tt > 0.0 else 0.0
        x = x + alpha * p + omega * s
        r = s - omega * t
        rho = rho_new
        if float(np.linalg.norm(r)) / denom <= tol:
            relres = true_relres()
            if relres <= tol:
                return x, iteration, relres, True

    return x, iteration, true_relres(), False
