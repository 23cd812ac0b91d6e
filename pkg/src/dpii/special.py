"""Airy function Ai on the non-negative half-line."""
import math
from decimal import Decimal, localcontext

from .errors import DomainError

#: Series/asymptotic switch. Below it the Maclaurin series is summed in
#: 50-digit decimal arithmetic (the two power series cancel to ~1e-5 of their
#: size by x = 7); above it the asymptotic series is already good to ~1e-12.
AIRY_SPLIT = 7.0

_AI0 = Decimal("0.355028053887817239260063186004183176397979174")
_DAI0 = Decimal("0.258819403792806798405183560189203963479091138")


def _airy_maclaurin(x):
    with localcontext() as ctx:
        ctx.prec = 50
        xd = Decimal(x)
        x3 = xd * xd * xd
        f = Decimal(1)
        g = xd
        tf, tg = Decimal(1), xd
        tiny = Decimal(10) ** -48
        k = 0
        while True:
            k += 1
            # f_k = f_{k-1} x^3 / ((3k-1) 3k),  g_k = g_{k-1} x^3 / (3k (3k+1))
            tf = tf * x3 / ((3 * k - 1) * (3 * k))
            tg = tg * x3 / ((3 * k) * (3 * k + 1))
            f += tf
            g += tg
            if tf < tiny * f and tg < tiny * (g + tiny):
                break
        return float(_AI0 * f - _DAI0 * g)


def _airy_asymptotic(x):
    zeta = 2.0 / 3.0 * x ** 1.5
    total, term, k = 1.0, 1.0, 0
    uk = 1.0
    while True:
        k += 1
        uk *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        nxt = (-1) ** k * uk / zeta ** k
        if abs(nxt) >= abs(term) or abs(nxt) < 1e-17:
            break
        total += nxt
        term = nxt
    return math.exp(-zeta) / (2.0 * math.sqrt(math.pi) * x ** 0.25) * total


def airy_ai(x):
    """Airy function Ai(x) for x >= 0.

    Parameters
    ----------
    x : float
        Non-negative abscissa.

    Returns
    -------
    float
        Ai(x), accurate to about 12 significant digits.

    Raises
    ------
    DomainError
        If ``x < 0``.
    """
    x = float(x)
    if not x >= 0.0:
        raise DomainError(f"airy_ai is implemented for x >= 0, got {x}")
    if x <= AIRY_SPLIT:
        return _airy_maclaurin(x)
    return _airy_asymptotic(x)
