# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Taylor-series propagator for psi'' = (p0 + p1 x + p2 x^2) psi.

Mirrors ``qtraj._kernels_py`` exactly; see that module for the algorithm.
"""
import numpy as np
from libc.math cimport fabs, floor

DEF MAX_ORDER = 400
DEF TOL = 8.673617379884035e-19  # 2**-60


cdef int _series(double q0, double q1, double q2, double y, double dy, double t,
                 double* out) noexcept nogil:
    """Sum the local Taylor series about a node; writes (y, dy, d2y) to out.

    Returns the order used, or -1 when the series did not converge.
    """
    cdef double t2, t3, t4, e_new, sy, sdy, sd2
    cdef double e3 = 0.0, em2 = 0.0, em1 = y, ek = dy * t
    cdef int k = 1, quiet = 0
    if t == 0.0:
        out[0] = y
        out[1] = dy
        out[2] = q0 * y
        return 0
    t2 = t * t
    t3 = t2 * t
    t4 = t2 * t2
    sy = em1 + ek
    sdy = ek
    sd2 = 0.0
    while k < MAX_ORDER:
        e_new = (q0 * t2 * em1 + q1 * t3 * em2 + q2 * t4 * e3) / ((k + 1.0) * k)
        e3 = em2
        em2 = em1
        em1 = ek
        ek = e_new
        k += 1
        sy += ek
        sdy += k * ek
        sd2 += k * (k - 1.0) * ek
        if fabs(ek) * k * k <= TOL * (fabs(sy) + fabs(sdy)):
            quiet += 1
            if quiet >= 3 and k > 4:
                out[0] = sy
                out[1] = sdy / t
                out[2] = sd2 / t2
                return k
        else:
            quiet = 0
    return -1


def taylor_table(double p0, double p1, double p2, double x0, double y0,
                 double dy0, double h, Py_ssize_t nsteps):
    """Propagate (psi, psi') from ``x0`` over ``nsteps`` steps of size ``h``."""
    ys_arr = np.empty(nsteps + 1)
    dys_arr = np.empty(nsteps + 1)
    cdef double[::1] ys = ys_arr
    cdef double[::1] dys = dys_arr
    cdef double out[3]
    cdef double xc, q0, q1
    cdef Py_ssize_t i
    cdef int status = 0
    ys[0] = y0
    dys[0] = dy0
    with nogil:
        for i in range(nsteps):
            xc = x0 + i * h
            q0 = p0 + p1 * xc + p2 * xc * xc
            q1 = p1 + 2.0 * p2 * xc
            if _series(q0, q1, p2, ys[i], dys[i], h, out) < 0:
                status = -1 - <int>i
                break
            ys[i + 1] = out[0]
            dys[i + 1] = out[1]
    if status < 0:
        return None
    return ys_arr, dys_arr


def taylor_eval(double p0, double p1, double p2, double x_start, double h,
                double[::1] ys, double[::1] dys, double[::1] x):
    """Evaluate (psi, psi', psi'') at arbitrary points from the node table."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t last = ys.shape[0] - 1
    y_arr = np.empty(n)
    dy_arr = np.empty(n)
    d2_arr = np.empty(n)
    cdef double[::1] yv = y_arr
    cdef double[::1] dyv = dy_arr
    cdef double[::1] d2v = d2_arr
    cdef double out[3]
    cdef double xc, q0, q1
    cdef Py_ssize_t i, idx
    cdef int bad = 0
    with nogil:
        for i in range(n):
            idx = <Py_ssize_t>floor((x[i] - x_start) / h + 0.5)
            if idx < 0:
                idx = 0
            elif idx > last:
                idx = last
            xc = x_start + idx * h
            q0 = p0 + p1 * xc + p2 * xc * xc
            q1 = p1 + 2.0 * p2 * xc
            if _series(q0, q1, p2, ys[idx], dys[idx], x[i] - xc, out) < 0:
                bad = 1
                break
            yv[i] = out[0]
            dyv[i] = out[1]
            d2v[i] = out[2]
    if bad:
        return None
    return y_arr, dy_arr, d2_arr
