# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: DP5(4) integration with reciprocal switch, Thomas solve.

Mirrors ``_pykernels`` line for line; see there for the contract.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow, isfinite
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

DEF C2 = 0.2
DEF C3 = 0.3
DEF C4 = 0.8
DEF C5 = 8.0 / 9.0
DEF A21 = 0.2
DEF A31 = 3.0 / 40.0
DEF A32 = 9.0 / 40.0
DEF A41 = 44.0 / 45.0
DEF A42 = -56.0 / 15.0
DEF A43 = 32.0 / 9.0
DEF A51 = 19372.0 / 6561.0
DEF A52 = -25360.0 / 2187.0
DEF A53 = 64448.0 / 6561.0
DEF A54 = -212.0 / 729.0
DEF A61 = 9017.0 / 3168.0
DEF A62 = -355.0 / 33.0
DEF A63 = 46732.0 / 5247.0
DEF A64 = 49.0 / 176.0
DEF A65 = -5103.0 / 18656.0
DEF B1 = 35.0 / 384.0
DEF B3 = 500.0 / 1113.0
DEF B4 = 125.0 / 192.0
DEF B5 = -2187.0 / 6784.0
DEF B6 = 11.0 / 84.0
DEF E1 = 71.0 / 57600.0
DEF E3 = -71.0 / 16695.0
DEF E4 = 71.0 / 1920.0
DEF E5 = -17253.0 / 339200.0
DEF E6 = 22.0 / 525.0
DEF E7 = -1.0 / 40.0

DEF S_REACHED = 0
DEF S_POLE = 1
DEF S_ZERO = 2
DEF S_BLOWUP = 3
DEF S_STEPFAIL = 4
DEF S_MAXSTEPS = 5

REACHED, POLE, ZERO, BLOWUP, STEPFAIL, MAXSTEPS = 0, 1, 2, 3, 4, 5


cdef inline double _f(double p, double shift, double x, double y, double yp,
                      bint recip) nogil:
    if recip:
        return (2.0 * yp * yp - p * (x + shift) * y * y - 2.0) / y
    return p * (x + shift) * y + 2.0 * y * y * y


cdef struct Buf:
    double* x
    double* y
    double* yp
    Py_ssize_t n
    Py_ssize_t cap


cdef int _push(Buf* b, double x, double y, double yp) nogil:
    cdef Py_ssize_t cap
    if b.n == b.cap:
        cap = 2 * b.cap
        b.x = <double*> realloc(b.x, cap * sizeof(double))
        b.y = <double*> realloc(b.y, cap * sizeof(double))
        b.yp = <double*> realloc(b.yp, cap * sizeof(double))
        if b.x == NULL or b.y == NULL or b.yp == NULL:
            return -1
        b.cap = cap
    b.x[b.n] = x
    b.y[b.n] = y
    b.yp[b.n] = yp
    b.n += 1
    return 0


def rk_integrate(double p, double shift, double x0, double y0, double yp0,
                 double x_stop, double rtol, double atol, double h0,
                 double switch_at, double w_stop, bint stop_on_zero,
                 bint stop_on_switch, long max_steps):
    cdef Buf b
    b.cap = 1024
    b.n = 0
    b.x = <double*> malloc(b.cap * sizeof(double))
    b.y = <double*> malloc(b.cap * sizeof(double))
    b.yp = <double*> malloc(b.cap * sizeof(double))
    if b.x == NULL or b.y == NULL or b.yp == NULL:
        raise MemoryError()
    cdef double x = x0, y, yp, h, yold, err, sy, sp, ey, ep
    cdef double k1y, k1p, k2y, k2p, k3y, k3p, k4y, k4p, k5y, k5p, k6y, k6p, k7y, k7p
    cdef double ty, tp, yn, ypn
    cdef bint recip, last
    cdef int status = S_MAXSTEPS
    cdef long it
    cdef bint exhausted = True
    _push(&b, x0, y0, yp0)
    recip = fabs(y0) >= switch_at
    if recip:
        y = 1.0 / y0
        yp = -yp0 / (y0 * y0)
    else:
        y = y0
        yp = yp0
    h = min(h0, x_stop - x0)
    k1y = yp
    k1p = _f(p, shift, x, y, yp, recip)
    with nogil:
        for it in range(max_steps):
            if x >= x_stop:
                status = S_REACHED
                exhausted = False
                break
            if recip and k1y != 0.0:
                h = min(h, 0.5 * fabs(y / k1y))
            last = False
            if x + h >= x_stop:
                h = x_stop - x
                last = True
            if h < 1e-13 * max(1.0, fabs(x)):
                status = S_STEPFAIL
                exhausted = False
                break
            ty = y + h * A21 * k1y
            tp = yp + h * A21 * k1p
            k2y = tp
            k2p = _f(p, shift, x + C2 * h, ty, tp, recip)
            ty = y + h * (A31 * k1y + A32 * k2y)
            tp = yp + h * (A31 * k1p + A32 * k2p)
            k3y = tp
            k3p = _f(p, shift, x + C3 * h, ty, tp, recip)
            ty = y + h * (A41 * k1y + A42 * k2y + A43 * k3y)
            tp = yp + h * (A41 * k1p + A42 * k2p + A43 * k3p)
            k4y = tp
            k4p = _f(p, shift, x + C4 * h, ty, tp, recip)
            ty = y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y)
            tp = yp + h * (A51 * k1p + A52 * k2p + A53 * k3p + A54 * k4p)
            k5y = tp
            k5p = _f(p, shift, x + C5 * h, ty, tp, recip)
            ty = y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y)
            tp = yp + h * (A61 * k1p + A62 * k2p + A63 * k3p + A64 * k4p + A65 * k5p)
            k6y = tp
            k6p = _f(p, shift, x + h, ty, tp, recip)
            yn = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
            ypn = yp + h * (B1 * k1p + B3 * k3p + B4 * k4p + B5 * k5p + B6 * k6p)
            k7y = ypn
            k7p = _f(p, shift, x + h, yn, ypn, recip)
            ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
            ep = h * (E1 * k1p + E3 * k3p + E4 * k4p + E5 * k5p + E6 * k6p + E7 * k7p)
            sy = atol + rtol * max(fabs(y), fabs(yn))
            sp = atol + rtol * max(fabs(yp), fabs(ypn))
            err = sqrt(0.5 * ((ey / sy) * (ey / sy) + (ep / sp) * (ep / sp)))
            if not isfinite(err):
                h *= 0.2
                continue
            if err > 1.0:
                h *= max(0.2, 0.9 * pow(err, -0.2))
                continue
            if last:
                x = x_stop
            else:
                x = x + h
            yold = y
            y = yn
            yp = ypn
            k1y = k7y
            k1p = k7p
            if err > 0.0:
                h *= min(5.0, max(0.2, 0.9 * pow(err, -0.2)))
            else:
                h *= 5.0
            if recip:
                if _push(&b, x, 1.0 / y, -yp / (y * y)) != 0:
                    status = S_STEPFAIL
                    exhausted = False
                    break
                if fabs(y) < w_stop or yold * y <= 0.0:
                    status = S_POLE
                    exhausted = False
                    break
                if fabs(y) > 2.0 / switch_at:
                    yp = -yp / (y * y)
                    y = 1.0 / y
                    recip = False
                    k1y = yp
                    k1p = _f(p, shift, x, y, yp, recip)
            else:
                if _push(&b, x, y, yp) != 0:
                    status = S_STEPFAIL
                    exhausted = False
                    break
                if stop_on_zero and yold * y <= 0.0:
                    status = S_ZERO
                    exhausted = False
                    break
                if fabs(y) >= switch_at:
                    if stop_on_switch:
                        status = S_BLOWUP
                        exhausted = False
                        break
                    yp = -yp / (y * y)
                    y = 1.0 / y
                    recip = True
                    k1y = yp
                    k1p = _f(p, shift, x, y, yp, recip)
    if exhausted and x >= x_stop:
        status = S_REACHED
    xs = np.empty(b.n)
    ys = np.empty(b.n)
    yps = np.empty(b.n)
    cdef double[::1] vx = xs, vy = ys, vp = yps
    cdef Py_ssize_t i
    for i in range(b.n):
        vx[i] = b.x[i]
        vy[i] = b.y[i]
        vp[i] = b.yp[i]
    free(b.x)
    free(b.y)
    free(b.yp)
    return xs, ys, yps, status


def thomas(sub, diag, sup, rhs, double guard=1e-300):
    cdef const double[::1] a = np.ascontiguousarray(sub, dtype=float)
    cdef const double[::1] d = np.ascontiguousarray(diag, dtype=float)
    cdef const double[::1] c = np.ascontiguousarray(sup, dtype=float)
    cdef const double[::1] r = np.ascontiguousarray(rhs, dtype=float)
    cdef Py_ssize_t n = d.shape[0], i
    out = np.zeros(n)
    cp_arr = np.zeros(n)
    dp_arr = np.zeros(n)
    cdef double[::1] x = out, cp = cp_arr, dp = dp_arr
    cdef double piv
    cdef Py_ssize_t bad = -1
    with nogil:
        piv = d[0]
        if fabs(piv) < guard:
            bad = 0
        else:
            if n > 1:
                cp[0] = c[0] / piv
            dp[0] = r[0] / piv
            for i in range(1, n):
                piv = d[i] - a[i - 1] * cp[i - 1]
                if fabs(piv) < guard:
                    bad = i
                    break
                if i < n - 1:
                    cp[i] = c[i] / piv
                dp[i] = (r[i] - a[i - 1] * dp[i - 1]) / piv
            if bad < 0:
                x[n - 1] = dp[n - 1]
                for i in range(n - 2, -1, -1):
                    x[i] = dp[i] - cp[i] * x[i + 1]
    if bad >= 0:
        return np.zeros(n), bad
    return out, -1
