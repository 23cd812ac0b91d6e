"""Left-end (x -> -inf) expansions for the U form u'' = 2xu + 2u^3.

With z = -x the solutions decaying to the sqrt branch satisfy

    u(x) ~ sqrt(z) * sum_m d_m z^(-3m),   d_0 = 1, d_1 = -1/16, ...

and differ from one another by multiples of the recessive mode
z^(-1/4) exp(-4/3 z^(3/2)). All functions here are vectorised over x.
"""
from fractions import Fraction

import numpy as np

N_COEFFS = 14


def _coefficients(count):
    # Substituting the series into the ODE and collecting z^(1/2 - 3k):
    # 4 d_k = (9(k-1)^2 - 1/4) d_{k-1} - 2 ([S^3]_k - 3 d_k)
    d = [Fraction(1)]
    for k in range(1, count):
        padded = d + [Fraction(0)]
        cube = Fraction(0)
        for i in range(k + 1):
            for j in range(k + 1 - i):
                cube += padded[i] * padded[j] * padded[k - i - j]
        d.append((d[k - 1] * (Fraction(9 * (k - 1) ** 2) - Fraction(1, 4)) - 2 * cube) / 4)
    return tuple(d)


#: Exact rational coefficients d_m of the U-form expansion.
LEFT_COEFFS_EXACT = _coefficients(N_COEFFS)
LEFT_COEFFS = np.array([float(c) for c in LEFT_COEFFS_EXACT])


def _n_terms(z, terms):
    """Number of terms kept at each z (optimal truncation when terms is None)."""
    z = np.atleast_1d(z)
    if terms is not None:
        return np.full(z.shape, int(terms))
    w = z ** -3.0
    mags = np.abs(LEFT_COEFFS)[None, :] * w[:, None] ** np.arange(N_COEFFS)[None, :]
    # keep the strictly decreasing prefix of term magnitudes
    decreasing = np.ones(mags.shape, dtype=bool)
    decreasing[:, 1:] = mags[:, 1:] < mags[:, :-1]
    return np.cumprod(decreasing, axis=1).sum(axis=1)


def left_series(x, terms=None):
    """Evaluate the truncated expansion and its derivative.

    Parameters
    ----------
    x : float or ndarray
        Negative abscissae (U form).
    terms : int, optional
        Number of terms; ``None`` truncates each point optimally.

    Returns
    -------
    u, uprime, err : ndarray
        Values, derivatives, and the magnitude of the last retained term
        times sqrt(z), a proxy for the truncation error.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    z = np.atleast_1d(-x)
    keep = _n_terms(z, terms)
    m = np.arange(N_COEFFS)[None, :]
    mask = m < keep[:, None]
    sz = np.sqrt(z)[:, None]
    powers = z[:, None] ** (-3.0 * m)
    terms_u = np.where(mask, LEFT_COEFFS[None, :] * powers, 0.0)
    u = (sz[:, 0]) * terms_u.sum(axis=1)
    # d/dx = -d/dz of d_m z^(1/2 - 3m)
    dterms = np.where(mask, -LEFT_COEFFS[None, :] * (0.5 - 3.0 * m) * z[:, None] ** (-0.5 - 3.0 * m), 0.0)
    up = dterms.sum(axis=1)
    last = np.take_along_axis(np.abs(terms_u), (keep - 1)[:, None], axis=1)[:, 0]
    err = last * sz[:, 0]
    if scalar:
        return float(u[0]), float(up[0]), float(err[0])
    return u, up, err


def recessive_mode(x):
    """The mode z^(-1/4) exp(-4/3 z^(3/2)) and its x-derivative (U form)."""
    z = -np.asarray(x, dtype=float)
    e = np.exp(-4.0 / 3.0 * z ** 1.5)
    g = z ** -0.25 * e
    gp = (0.25 * z ** -1.25 + 2.0 * z ** 0.25) * e
    return g, gp


def tail_integral(x0, terms=6):
    """Integral of (u^2 + s) ds over (-inf, x0] using the expansion.

    With u^2 = z * sum_m e_m z^(-3m) (e = series square) the integrand is
    sum_{m>=1} e_m z^(1-3m), integrated termwise. Leading term -(1/8)/z0.
    """
    z0 = -float(x0)
    d = LEFT_COEFFS_EXACT[:terms]
    total = 0.0
    for m in range(1, terms):
        em = sum(d[i] * d[m - i] for i in range(m + 1))
        total += float(em) * z0 ** (2 - 3 * m) / (3 * m - 2)
    return total
