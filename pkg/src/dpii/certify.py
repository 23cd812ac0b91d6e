"""Newton-Kantorovich certification of the approximate minimiser.

With beta >= ||F'(a0)^-1 F(a0)|| and M a Lipschitz constant of
F'(a0)^-1 F' on the ball B(a0, 2 beta), beta M < 1/2 guarantees a zero of
F within t* = 2 beta / (1 + sqrt(1 - 2 beta M)) of a0.

Two values of beta are computed side by side:

* ``beta``: the Newton step norm ||F'(a0)^-1 F(a0)||, from a tridiagonal
  solve;
* ``beta_split``: the factored bound varah(F'(a0)) ||F(a0)||, which is
  never smaller.

The Lipschitz part is always factored through D = diag(a0):
M = varah(D^-1 F'(a0)) * max_j L_j, where L_j bounds row j of
D^-1 (F'(a) - F'(b)) per unit ||a - b||.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .discrete import TridiagMatrix, f_jacobian, f_map, tridiag_solve
from .errors import BallEscapes, DomainError, NotDominant


@dataclass(frozen=True)
class KantorovichCertificate:
    """Computed Kantorovich quantities for one instance.

    ``pass_`` is exported as ``pass``. The ``*_split`` fields repeat the
    test with beta from the factored Varah bound; they are reported next to
    the primary result and do not change ``pass_``.
    """

    beta: float
    M: float
    product: float
    t_star: Optional[float]
    pass_: bool
    gamma_min: float
    gammaD_min: float
    f_norm: float
    varah: float = math.nan
    varah_scaled: float = math.nan
    row_constant: float = math.nan
    beta_split: float = math.nan
    M_split: float = math.nan
    product_split: float = math.nan
    t_star_split: Optional[float] = None
    pass_split: bool = False
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.pass_ != (self.product < 0.5):
            raise ValueError("pass must equal product < 1/2")
        if (self.t_star is not None) != self.pass_:
            raise ValueError("t_star is present exactly when the certificate passes")
        if self.beta > self.beta_split * (1.0 + 1e-12):
            raise ValueError("beta exceeds its factored bound")

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("pass_")
        extra = d.pop("extra")
        d.update(extra)
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None
        return d

    def to_json(self, **more):
        return json.dumps(dict(self.to_dict(), **more), indent=2)


def t_star_of(beta, M):
    """2 beta / (1 + sqrt(1 - 2 beta M)), or None when beta M >= 1/2."""
    if not beta * M < 0.5:
        return None
    return 2.0 * beta / (1.0 + math.sqrt(1.0 - 2.0 * beta * M))


def varah_bound(m):
    """1 / min_k (|m_kk| - sum_{j != k} |m_kj|).

    Raises
    ------
    NotDominant
        If some row margin is not positive; reports the row.
    """
    margins = m.row_margins()
    k = int(np.argmin(margins))
    if not margins[k] > 0:
        raise NotDominant(f"row {k} is not strictly dominant (margin {margins[k]:.3g})",
                          k, float(margins[k]))
    return 1.0 / float(margins[k])


def _a(state):
    return np.asarray(getattr(state, "a", state), dtype=float)


def gamma_rows(inst, a0, scaled=False):
    """Row margins 2 a_k (a_{k+1} + a_{k-1}) + 2 w_k - 2 (1 - a_k^2).

    Both off-diagonal entries of row k are counted, including the boundary
    rows where one neighbour is fixed; this is a lower bound for the true
    margins of F'(a0). ``scaled`` divides by a_k (margins of D^-1 F'(a0)).
    """
    a = _a(a0)
    if not np.all((a > 0) & (a < 1)):
        raise DomainError("gamma_rows needs every a_k in (0, 1)")
    p = np.concatenate(([1.0], a, [1.0]))
    g = 2.0 * a * (p[2:] + p[:-2]) + 2.0 * inst.weights() - 2.0 * (1.0 - a * a)
    return g / a if scaled else g


def lipschitz_rows(inst, a0, radius):
    """Per-row bounds L_j on ||row_j of D^-1 (F'(a) - F'(b))||_1 / ||a - b||_inf.

    For a, b in the box |a - a0| <= radius:

    * off-diagonal j, j+-1: |a_j^2 - b_j^2| <= 2 (a0_j + r) |a - b|
    * diagonal: 2 a_j N_j(a) - 2 b_j N_j(b) with N_j the neighbour sum,
      bounded by 2 [N_max + (a0_j + r) m_j] |a - b|, where m_j counts the
      non-boundary neighbours and N_max uses 1 for boundary neighbours.
    """
    a = _a(a0)
    if not radius > 0:
        raise DomainError("radius must be positive")
    if np.any(a - radius <= 0):
        k = int(np.argmin(a))
        raise BallEscapes(f"a0_{k} - radius = {a[k] - radius:.3g} <= 0")
    up = np.abs(a) + radius
    m = np.full(a.size, 2.0)
    m[0] -= 1.0
    m[-1] -= 1.0
    pu = np.concatenate(([1.0], up, [1.0]))
    n_max = pu[2:] + pu[:-2]
    off = m * 2.0 * up
    diag = 2.0 * (n_max + up * m)
    return (off + diag) / a


def lipschitz_M(inst, a0, radius):
    """varah(D^-1 F'(a0)) * max_j L_j."""
    a = _a(a0)
    rows = lipschitz_rows(inst, a, radius)
    scaled = f_jacobian(inst, a).scale_rows(1.0 / a)
    return varah_bound(scaled) * float(rows.max())


def newton_step_norm(inst, a0):
    """||F'(a0)^-1 F(a0)||_inf from a direct tridiagonal solve."""
    a = _a(a0)
    return float(np.max(np.abs(tridiag_solve(f_jacobian(inst, a), f_map(inst, a)))))


def _m_or_inf(inst, a, radius):
    try:
        return lipschitz_M(inst, a, radius), float(lipschitz_rows(inst, a, radius).max())
    except BallEscapes:
        return math.inf, math.inf


def kantorovich_certificate(inst, a0, **extra):
    """Assemble the certificate for ``a0``.

    Extra keyword arguments are carried into the JSON export.

    Raises
    ------
    NotDominant
        If F'(a0) or D^-1 F'(a0) is not strictly row dominant.
    """
    a = _a(a0)
    jac = f_jacobian(inst, a)
    varah = varah_bound(jac)
    varah_scaled = varah_bound(jac.scale_rows(1.0 / a))
    f_norm = float(np.max(np.abs(f_map(inst, a))))
    beta = newton_step_norm(inst, a)
    # a zero beta (a0 already a root) still needs a positive ball radius
    M, rows = _m_or_inf(inst, a, max(2.0 * beta, np.finfo(float).tiny))
    t_star = t_star_of(beta, M)
    beta_v = varah * f_norm
    M_v, _ = _m_or_inf(inst, a, 2.0 * beta_v)
    t_star_v = t_star_of(beta_v, M_v)
    gamma = gamma_rows(inst, a)
    return KantorovichCertificate(
        beta=beta, M=M, product=beta * M, t_star=t_star, pass_=t_star is not None,
        gamma_min=float(np.min(gamma)), gammaD_min=float(np.min(gamma / a)), f_norm=f_norm,
        varah=varah, varah_scaled=varah_scaled, row_constant=rows,
        beta_split=beta_v, M_split=M_v, product_split=beta_v * M_v, t_star_split=t_star_v,
        pass_split=t_star_v is not None, extra=dict(extra))
