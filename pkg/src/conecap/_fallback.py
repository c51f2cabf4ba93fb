"""Pure numpy implementation of the hot kernels.

Mirrors ``_kernels.pyx`` function for function. The tridiagonal-plus-one
system of the flow step is solved here with ``scipy.linalg.solve_banded``,
while the compiled core does its own elimination, so the two backends
cross-check each other.
"""
import numpy as np
from scipy.linalg import solve_banded

# stencil offsets, index k = (di + 1) * 3 + (dj + 1)
OFFSETS = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)]


def _slices(d, size):
    if d < 0:
        return slice(-d, size), slice(0, size + d)
    if d > 0:
        return slice(0, size - d), slice(d, size)
    return slice(0, size), slice(0, size)


def stencil_apply(S, x, out=None):
    """``out = A x`` for the 9-point operator stored as ``S[k, i, j]``."""
    ni, nj = x.shape
    if out is None:
        out = np.empty_like(x)
    np.multiply(S[4], x, out=out)
    for k, (di, dj) in enumerate(OFFSETS):
        if k == 4:
            continue
        di_dst, di_src = _slices(di, ni)
        dj_dst, dj_src = _slices(dj, nj)
        out[di_dst, dj_dst] += S[k][di_dst, dj_dst] * x[di_src, dj_src]
    return out


def pcg_stencil(S, b, x0, tol, maxiter):
    """Jacobi-preconditioned conjugate gradients on the stencil operator.

    Returns ``(x, iterations, relative_residual)``; the caller decides what
    to do when ``relative_residual > tol``.
    """
    x = np.array(x0, dtype=float, copy=True)
    dinv = 1.0 / S[4]
    bnorm = float(np.sqrt(np.sum(b * b)))
    if bnorm == 0.0:
        return np.zeros_like(x), 0, 0.0
    r = b - stencil_apply(S, x)
    z = dinv * r
    p = z.copy()
    rz = float(np.sum(r * z))
    q = np.empty_like(x)
    rel = float(np.sqrt(np.sum(r * r))) / bnorm
    it = 0
    while rel > tol and it < maxiter:
        stencil_apply(S, p, out=q)
        a = rz / float(np.sum(p * q))
        x += a * p
        r -= a * q
        rel = float(np.sqrt(np.sum(r * r))) / bnorm
        it += 1
        if rel <= tol:
            break
        np.multiply(dinv, r, out=z)
        rz_new = float(np.sum(r * z))
        p *= rz_new / rz
        p += z
        rz = rz_new
    return x, it, rel


def flow_terms(u, h, n, cot):
    """Derivatives and speed data of the radial-graph flow ``u_t = v^2 / D``."""
    m = u.size - 1
    up = np.zeros(m + 1)
    upp = np.empty(m + 1)
    up[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    upp[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
    upp[0] = 2 * (u[1] - u[0]) / h**2
    upp[-1] = (8 * (u[-2] - u[-1]) - (u[-3] - u[-1])) / (2 * h**2)
    v2 = 1.0 + up**2
    ct = (n - 2) * up * cot
    ct[0] = (n - 2) * upp[0]
    D = (n - 1) - upp / v2 - ct
    return up, upp, v2, D


def imcf_step(u, h, n, cot, dt):
    """One linearly implicit step of the flow.

    Returns ``(u_new, imin, Dmin)``. When ``Dmin <= 0`` the step is not taken
    and ``u_new`` is ``None``.
    """
    m = u.size - 1
    up, upp, v2, D = flow_terms(u, h, n, cot)
    imin = int(np.argmin(D))
    if not D[imin] > 0:
        return None, imin, float(D[imin])
    c = 1.0 / D**2
    f = v2 / D
    k = dt * c / h**2
    g = dt * c * v2 * (n - 2) * cot / (2 * h)
    # banded storage for solve_banded with (l, u) = (2, 1)
    ab = np.zeros((4, m + 1))
    diag = np.empty(m + 1)
    lower = np.zeros(m + 1)  # entry (i, i-1)
    upper = np.zeros(m + 1)  # entry (i, i+1)
    diag[1:-1] = 1 + 2 * k[1:-1]
    lower[1:-1] = -(k[1:-1] - g[1:-1])
    upper[1:-1] = -(k[1:-1] + g[1:-1])
    diag[0] = 1 + 2 * (n - 1) * k[0]
    upper[0] = -2 * (n - 1) * k[0]
    diag[m] = 1 + 3.5 * k[m]
    lower[m] = -4 * k[m]
    low2_m = 0.5 * k[m]  # entry (m, m-2)
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    ab[3, m - 2] = low2_m
    # P u, for the explicit remainder f - P u
    Pu = np.empty(m + 1)
    Pu[1:-1] = c[1:-1] * (upp[1:-1] + v2[1:-1] * (n - 2) * cot[1:-1] * up[1:-1])
    Pu[0] = c[0] * (n - 1) * upp[0]
    Pu[m] = c[m] * upp[m]
    rhs = u + dt * (f - Pu)
    return solve_banded((2, 1), ab, rhs), imin, float(D[imin])
