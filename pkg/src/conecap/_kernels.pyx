# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: 9-point stencil CG and the implicit flow step."""
import numpy as np
from libc.math cimport sqrt


cdef void _apply(const double[:, :, ::1] S, const double[:, ::1] x, double[:, ::1] y) noexcept nogil:
    cdef Py_ssize_t ni = x.shape[0], nj = x.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(ni):
        for j in range(nj):
            acc = S[4, i, j] * x[i, j]
            if i > 0:
                acc = acc + S[1, i, j] * x[i - 1, j]
                if j > 0:
                    acc = acc + S[0, i, j] * x[i - 1, j - 1]
                if j < nj - 1:
                    acc = acc + S[2, i, j] * x[i - 1, j + 1]
            if i < ni - 1:
                acc = acc + S[7, i, j] * x[i + 1, j]
                if j > 0:
                    acc = acc + S[6, i, j] * x[i + 1, j - 1]
                if j < nj - 1:
                    acc = acc + S[8, i, j] * x[i + 1, j + 1]
            if j > 0:
                acc = acc + S[3, i, j] * x[i, j - 1]
            if j < nj - 1:
                acc = acc + S[5, i, j] * x[i, j + 1]
            y[i, j] = acc


def stencil_apply(S, x, out=None):
    S = np.ascontiguousarray(S, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    if out is None:
        out = np.empty_like(x)
    _apply(S, x, out)
    return out


def pcg_stencil(S, b, x0, double tol, Py_ssize_t maxiter):
    cdef const double[:, :, ::1] Sv = np.ascontiguousarray(S, dtype=np.float64)
    cdef const double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    xa = np.array(x0, dtype=np.float64, copy=True, order="C")
    ra = np.empty_like(xa)
    za = np.empty_like(xa)
    pa = np.empty_like(xa)
    qa = np.empty_like(xa)
    cdef double[:, ::1] x = xa
    cdef double[:, ::1] r = ra
    cdef double[:, ::1] z = za
    cdef double[:, ::1] p = pa
    cdef double[:, ::1] q = qa
    cdef Py_ssize_t ni = xa.shape[0], nj = xa.shape[1]
    cdef Py_ssize_t i, j, it = 0
    cdef double bnorm = 0.0, rr = 0.0, rz = 0.0, rz_new, pq, a, beta, rel
    with nogil:
        for i in range(ni):
            for j in range(nj):
                bnorm += bv[i, j] * bv[i, j]
        bnorm = sqrt(bnorm)
    if bnorm == 0.0:
        return np.zeros_like(xa), 0, 0.0
    with nogil:
        _apply(Sv, x, r)
        for i in range(ni):
            for j in range(nj):
                r[i, j] = bv[i, j] - r[i, j]
                z[i, j] = r[i, j] / Sv[4, i, j]
                p[i, j] = z[i, j]
                rz += r[i, j] * z[i, j]
                rr += r[i, j] * r[i, j]
        rel = sqrt(rr) / bnorm
        while rel > tol and it < maxiter:
            _apply(Sv, p, q)
            pq = 0.0
            for i in range(ni):
                for j in range(nj):
                    pq += p[i, j] * q[i, j]
            a = rz / pq
            rr = 0.0
            for i in range(ni):
                for j in range(nj):
                    x[i, j] += a * p[i, j]
                    r[i, j] -= a * q[i, j]
                    rr += r[i, j] * r[i, j]
            rel = sqrt(rr) / bnorm
            it += 1
            if rel <= tol:
                break
            rz_new = 0.0
            for i in range(ni):
                for j in range(nj):
                    z[i, j] = r[i, j] / Sv[4, i, j]
                    rz_new += r[i, j] * z[i, j]
            beta = rz_new / rz
            rz = rz_new
            for i in range(ni):
                for j in range(nj):
                    p[i, j] = z[i, j] + beta * p[i, j]
    return xa, it, rel


def imcf_step(u_in, double h, int n, cot_in, double dt):
    cdef const double[::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef const double[::1] cot = np.ascontiguousarray(cot_in, dtype=np.float64)
    cdef Py_ssize_t m = u.shape[0] - 1
    cdef Py_ssize_t i, imin = 0
    out = np.empty(m + 1)
    work = np.empty((6, m + 1))
    cdef double[::1] un = out
    cdef double[:, ::1] w = work
    # rows of w: up, upp, v2, D, then lower / diag / upper reuse below
    cdef double[::1] up = w[0], upp = w[1], v2 = w[2], D = w[3]
    cdef double[::1] lo = w[4], di = w[5]
    cdef double h2 = h * h, Dmin, c, k, g, f, Pu, e, fac, ct
    up_arr = np.empty(m + 1)
    cdef double[::1] upv = up_arr
    with nogil:
        up[0] = 0.0
        up[m] = 0.0
        for i in range(1, m):
            up[i] = (u[i + 1] - u[i - 1]) / (2 * h)
            upp[i] = (u[i + 1] - 2 * u[i] + u[i - 1]) / h2
        upp[0] = 2 * (u[1] - u[0]) / h2
        upp[m] = (8 * (u[m - 1] - u[m]) - (u[m - 2] - u[m])) / (2 * h2)
        Dmin = 1e300
        for i in range(m + 1):
            v2[i] = 1.0 + up[i] * up[i]
            if i == 0:
                ct = (n - 2) * upp[0]
            else:
                ct = (n - 2) * up[i] * cot[i]
            D[i] = (n - 1) - upp[i] / v2[i] - ct
            if D[i] < Dmin:
                Dmin = D[i]
                imin = i
    if not Dmin > 0:
        return None, imin, Dmin
    with nogil:
        # assemble: lo[i] = (i, i-1), di[i] = (i, i), upv[i] = (i, i+1); rhs in un
        for i in range(m + 1):
            c = 1.0 / (D[i] * D[i])
            f = v2[i] / D[i]
            k = dt * c / h2
            if i == 0:
                di[i] = 1 + 2 * (n - 1) * k
                upv[i] = -2 * (n - 1) * k
                lo[i] = 0.0
                Pu = c * (n - 1) * upp[i]
            elif i == m:
                di[i] = 1 + 3.5 * k
                lo[i] = -4 * k
                upv[i] = 0.0
                Pu = c * upp[i]
            else:
                g = dt * c * v2[i] * (n - 2) * cot[i] / (2 * h)
                di[i] = 1 + 2 * k
                lo[i] = -(k - g)
                upv[i] = -(k + g)
                Pu = c * (upp[i] + v2[i] * (n - 2) * cot[i] * up[i])
            un[i] = u[i] + dt * (f - Pu)
        # the wall row also couples to m-2 with coefficient 0.5 k_m; clear it with row m-1
        k = dt / (D[m] * D[m]) / h2
        e = 0.5 * k
        fac = e / lo[m - 1]
        lo[m] = lo[m] - fac * di[m - 1]
        di[m] = di[m] - fac * upv[m - 1]
        un[m] = un[m] - fac * un[m - 1]
        # Thomas sweep
        for i in range(1, m + 1):
            fac = lo[i] / di[i - 1]
            di[i] = di[i] - fac * upv[i - 1]
            un[i] = un[i] - fac * un[i - 1]
        un[m] = un[m] / di[m]
        i = m - 1
        while i >= 0:
            un[i] = (un[i] - upv[i] * un[i + 1]) / di[i]
            i -= 1
    return out, imin, Dmin
