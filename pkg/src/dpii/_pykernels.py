"""Pure-Python reference kernels.

Same signatures and status codes as the compiled ``_ckernels`` module; used
when the extension is not built or when ``DPII_PURE_PYTHON=1``.
"""
import math

import numpy as np

REACHED, POLE, ZERO, BLOWUP, STEPFAIL, MAXSTEPS = 0, 1, 2, 3, 4, 5

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9
_A21 = 1.0 / 5
_A31, _A32 = 3.0 / 40, 9.0 / 40
_A41, _A42, _A43 = 44.0 / 45, -56.0 / 15, 32.0 / 9
_A51, _A52, _A53, _A54 = 19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168, -355.0 / 33, 46732.0 / 5247,
                                49.0 / 176, -5103.0 / 18656)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600, -71.0 / 16695, 71.0 / 1920,
                                -17253.0 / 339200, 22.0 / 525, -1.0 / 40)


def _f(p, shift, x, y, yp, recip):
    if recip:
        return (2.0 * yp * yp - p * (x + shift) * y * y - 2.0) / y
    return p * (x + shift) * y + 2.0 * y * y * y


def rk_integrate(p, shift, x0, y0, yp0, x_stop, rtol, atol, h0, switch_at,
                 w_stop, stop_on_zero, stop_on_switch, max_steps):
    """Integrate ``y'' = p (x + shift) y + 2 y^3`` with a DP5(4) pair.

    Near blow-up (``|y| >= switch_at``) the state is swapped for the
    reciprocal ``w = 1/y``. Samples are always returned in the direct
    representation.

    Returns
    -------
    xs, ys, yps : ndarray
    status : int
        One of REACHED, POLE, ZERO, BLOWUP, STEPFAIL, MAXSTEPS.
    """
    xs = [x0]
    ys = [y0]
    yps = [yp0]
    x = x0
    recip = abs(y0) >= switch_at
    if recip:
        y, yp = 1.0 / y0, -yp0 / (y0 * y0)
    else:
        y, yp = y0, yp0
    h = min(h0, x_stop - x0)
    k1y, k1p = yp, _f(p, shift, x, y, yp, recip)
    status = MAXSTEPS
    for _ in range(max_steps):
        if x >= x_stop:
            status = REACHED
            break
        if recip and k1y != 0.0:
            h = min(h, 0.5 * abs(y / k1y))
        last = False
        if x + h >= x_stop:
            h = x_stop - x
            last = True
        if h < 1e-13 * max(1.0, abs(x)):
            status = STEPFAIL
            break
        # stages
        ty = y + h * _A21 * k1y
        tp = yp + h * _A21 * k1p
        k2y, k2p = tp, _f(p, shift, x + _C2 * h, ty, tp, recip)
        ty = y + h * (_A31 * k1y + _A32 * k2y)
        tp = yp + h * (_A31 * k1p + _A32 * k2p)
        k3y, k3p = tp, _f(p, shift, x + _C3 * h, ty, tp, recip)
        ty = y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y)
        tp = yp + h * (_A41 * k1p + _A42 * k2p + _A43 * k3p)
        k4y, k4p = tp, _f(p, shift, x + _C4 * h, ty, tp, recip)
        ty = y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y)
        tp = yp + h * (_A51 * k1p + _A52 * k2p + _A53 * k3p + _A54 * k4p)
        k5y, k5p = tp, _f(p, shift, x + _C5 * h, ty, tp, recip)
        ty = y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y)
        tp = yp + h * (_A61 * k1p + _A62 * k2p + _A63 * k3p + _A64 * k4p + _A65 * k5p)
        k6y, k6p = tp, _f(p, shift, x + h, ty, tp, recip)
        yn = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        ypn = yp + h * (_B1 * k1p + _B3 * k3p + _B4 * k4p + _B5 * k5p + _B6 * k6p)
        k7y, k7p = ypn, _f(p, shift, x + h, yn, ypn, recip)
        ey = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
        ep = h * (_E1 * k1p + _E3 * k3p + _E4 * k4p + _E5 * k5p + _E6 * k6p + _E7 * k7p)
        sy = atol + rtol * max(abs(y), abs(yn))
        sp = atol + rtol * max(abs(yp), abs(ypn))
        err = math.sqrt(0.5 * ((ey / sy) ** 2 + (ep / sp) ** 2))
        if not math.isfinite(err):
            h *= 0.2
            continue
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue
        # accepted
        x = x_stop if last else x + h
        yold = y
        y, yp = yn, ypn
        k1y, k1p = k7y, k7p
        h *= min(5.0, max(0.2, 0.9 * err ** -0.2)) if err > 0.0 else 5.0
        if recip:
            xs.append(x)
            ys.append(1.0 / y)
            yps.append(-yp / (y * y))
            if abs(y) < w_stop or yold * y <= 0.0:
                status = POLE
                break
            if abs(y) > 2.0 / switch_at:
                y, yp = 1.0 / y, -yp / (y * y)
                recip = False
                k1y, k1p = yp, _f(p, shift, x, y, yp, recip)
        else:
            xs.append(x)
            ys.append(y)
            yps.append(yp)
            if stop_on_zero and yold * y <= 0.0:
                status = ZERO
                break
            if abs(y) >= switch_at:
                if stop_on_switch:
                    status = BLOWUP
                    break
                y, yp = 1.0 / y, -yp / (y * y)
                recip = True
                k1y, k1p = yp, _f(p, shift, x, y, yp, recip)
    else:
        if x >= x_stop:
            status = REACHED
    return (np.asarray(xs, dtype=float), np.asarray(ys, dtype=float),
            np.asarray(yps, dtype=float), status)


def thomas(sub, diag, sup, rhs, guard=1e-300):
    """Solve a tridiagonal system by Thomas elimination.

    Returns
    -------
    x : ndarray
    bad_row : int
        -1 on success, otherwise the row whose pivot fell below ``guard``.
    """
    sub = np.asarray(sub, dtype=float).tolist()
    diag = np.asarray(diag, dtype=float).tolist()
    sup = np.asarray(sup, dtype=float).tolist()
    rhs = np.asarray(rhs, dtype=float).tolist()
    n = len(diag)
    c = [0.0] * n
    d = [0.0] * n
    piv = diag[0]
    if abs(piv) < guard:
        return np.zeros(n), 0
    c[0] = sup[0] / piv if n > 1 else 0.0
    d[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i - 1] * c[i - 1]
        if abs(piv) < guard:
            return np.zeros(n), i
        if i < n - 1:
            c[i] = sup[i] / piv
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / piv
    x = [0.0] * n
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return np.asarray(x, dtype=float), -1
