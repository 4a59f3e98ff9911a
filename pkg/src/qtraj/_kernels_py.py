"""Pure-Python Taylor-series propagator for psi'' = (p0 + p1 x + p2 x^2) psi.

About a node ``xc`` the coefficient is ``q0 + q1 t + q2 t^2`` (``t = x - xc``) and the
series ``psi = sum c_k t^k`` obeys

    (k + 2)(k + 1) c_{k+2} = q0 c_k + q1 c_{k-1} + q2 c_{k-2}.

Summation runs until three consecutive terms (weighted by ``k^2`` so that the second
derivative is converged too) fall below ``2**-60`` of the running sum.  The compiled
``qtraj._kernels`` module implements the identical algorithm.
"""
import numpy as np

MAX_ORDER = 400
TOL = 2.0**-60


def _series(q0, q1, q2, y, dy, t):
    if t == 0.0:
        return y, dy, q0 * y
    t2 = t * t
    t3 = t2 * t
    t4 = t2 * t2
    e3, em2, em1, ek = 0.0, 0.0, y, dy * t
    sy = y + ek
    sdy = ek
    sd2 = 0.0
    quiet = 0
    k = 1
    while k < MAX_ORDER:
        e_new = (q0 * t2 * em1 + q1 * t3 * em2 + q2 * t4 * e3) / ((k + 1.0) * k)
        e3, em2, em1, ek = em2, em1, ek, e_new
        k += 1
        sy += ek
        sdy += k * ek
        sd2 += k * (k - 1.0) * ek
        if abs(ek) * k * k <= TOL * (abs(sy) + abs(sdy)):
            quiet += 1
            if quiet >= 3 and k > 4:
                return sy, sdy / t, sd2 / t2
        else:
            quiet = 0
    return None


def taylor_table(p0, p1, p2, x0, y0, dy0, h, nsteps):
    ys = np.empty(nsteps + 1)
    dys = np.empty(nsteps + 1)
    ys[0] = y = float(y0)
    dys[0] = dy = float(dy0)
    for i in range(nsteps):
        xc = x0 + i * h
        res = _series(p0 + p1 * xc + p2 * xc * xc, p1 + 2.0 * p2 * xc, p2, y, dy, h)
        if res is None:
            return None
        y, dy, _ = res
        ys[i + 1] = y
        dys[i + 1] = dy
    return ys, dys


def taylor_eval(p0, p1, p2, x_start, h, ys, dys, x):
    """Vectorised over evaluation points; same arithmetic as the scalar series."""
    x = np.ascontiguousarray(x, dtype=float)
    last = ys.shape[0] - 1
    idx = np.clip(np.floor((x - x_start) / h + 0.5).astype(np.int64), 0, last)
    xc = x_start + idx * h
    t = x - xc
    q0 = p0 + p1 * xc + p2 * xc * xc
    q1 = p1 + 2.0 * p2 * xc
    y = ys[idx]
    dy = dys[idx]

    zero = t == 0.0
    ts = np.where(zero, 1.0, t)
    t2 = ts * ts
    t3 = t2 * ts
    t4 = t2 * t2
    e3 = np.zeros_like(x)
    em2 = np.zeros_like(x)
    em1 = y.copy()
    ek = dy * ts
    sy = y + ek
    sdy = ek.copy()
    sd2 = np.zeros_like(x)
    quiet = np.zeros(x.shape, dtype=np.int64)
    done = np.zeros(x.shape, dtype=bool)
    out_y = np.empty_like(x)
    out_dy = np.empty_like(x)
    out_d2 = np.empty_like(x)
    k = 1
    while k < MAX_ORDER and not done.all():
        e_new = (q0 * t2 * em1 + q1 * t3 * em2 + p2 * t4 * e3) / ((k + 1.0) * k)
        e3, em2, em1, ek = em2, em1, ek, e_new
        k += 1
        sy = sy + ek
        sdy = sdy + k * ek
        sd2 = sd2 + k * (k - 1.0) * ek
        small = np.abs(ek) * k * k <= TOL * (np.abs(sy) + np.abs(sdy))
        quiet = np.where(small, quiet + 1, 0)
        finish = (~done) & (quiet >= 3) & (k > 4)
        if finish.any():
            out_y[finish] = sy[finish]
            out_dy[finish] = sdy[finish] / ts[finish]
            out_d2[finish] = sd2[finish] / t2[finish]
            done |= finish
    if not done.all():
        return None
    out_y[zero] = y[zero]
    out_dy[zero] = dy[zero]
    out_d2[zero] = q0[zero] * y[zero]
    return out_y, out_dy, out_d2
