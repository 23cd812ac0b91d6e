"""Approximate minimiser built from the shifted tronquee solution.

With x_k = (k - n) / n^(1/3) and omega_n = omega + eps n^(-1/3),

    a0_k = n^(-1/3) nu(x_k) - omega_n / (3 (k - n) n^(2/3)) - 1 / (2n),

where nu = nu_{omega_n} has its pole at 0 with residue -1. The instance
paired with it is t = n - omega n^(1/3).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .discrete import DpiiInstance, DpiiState, f_map
from .errors import DomainError, GridCoverage, IndexRange
from .tronquee import nu_omega


@dataclass(frozen=True)
class ApproxConfig:
    """Target pole ``omega``, offset ``eps``, size ``n`` and region constant."""

    omega: float
    eps: float
    n: int
    delta_split: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise DomainError(f"n must be an integer >= 8, got {self.n}")
        if not self.delta_split > 0:
            raise DomainError("delta_split must be positive")
        if not self.eps > 0:
            raise DomainError("eps must be positive")
        object.__setattr__(self, "n", int(self.n))

    @property
    def cbrt_n(self):
        return float(np.cbrt(self.n))

    @property
    def omega_n(self):
        return self.omega + self.eps / self.cbrt_n

    @property
    def t(self):
        return self.n - self.omega * self.cbrt_n

    @property
    def split_k(self):
        """First index of the boundary region, n - floor(delta n^(1/3))."""
        return self.n - int(math.floor(self.delta_split * self.cbrt_n))

    def instance(self):
        return DpiiInstance(self.n, self.t, self.eps)

    def x_of_k(self, k):
        return (np.asarray(k, dtype=float) - self.n) / self.cbrt_n


def nu_for(cfg, tol=1e-10, key=None, cache=None):
    """nu_{omega_n} sampled on the range that ``build_a0`` needs."""
    x_lo = float(cfg.x_of_k(0)) - 1.0
    x_hi = float(cfg.x_of_k(cfg.n - 2))
    return nu_omega(cfg.omega_n, (x_lo, x_hi), tol, key=key, cache=cache)


def build_a0(cfg, nu):
    """Approximate minimiser for k = 0..n-2 (raw state).

    The k = 0 entry uses the same formula; x_0 = -n^(2/3) lies in the far
    left where nu is given by its expansion.

    Raises
    ------
    GridCoverage
        If ``nu`` does not span [x_0, x_{n-2}].
    """
    if nu.form.tag != "NU":
        raise DomainError("build_a0 needs an NU trajectory")
    if not math.isclose(nu.form.omega, cfg.omega_n, rel_tol=1e-12, abs_tol=1e-12):
        raise DomainError(f"trajectory is for omega={nu.form.omega}, config needs {cfg.omega_n}")
    k = np.arange(cfg.n - 1)
    x = cfg.x_of_k(k)
    if x[0] < nu.grid[0] or x[-1] > nu.grid[-1]:
        raise GridCoverage(
            f"nu covers [{nu.grid[0]:.6g}, {nu.grid[-1]:.6g}], need [{x[0]:.6g}, {x[-1]:.6g}]")
    v, _ = nu.evaluate(x)
    n = cfg.n
    a0 = v / cfg.cbrt_n - cfg.omega_n / (3.0 * (k - n) * cfg.cbrt_n ** 2) - 1.0 / (2.0 * n)
    return DpiiState.raw(a0)


class ErrorProfile(NamedTuple):
    norm: float
    region1_max: float
    region2_max: float
    argmax_k: int
    split_k: int

    def to_json(self, **extra):
        return json.dumps(dict(self._asdict(), **extra), indent=2)


def f_error_profile(inst, a0, delta_split=1.0, cfg=None):
    """||F(a0)||_inf with its maxima over the bulk and boundary regions.

    The bulk region is k < split_k and the boundary region k >= split_k,
    split_k = n - floor(delta n^(1/3)).
    """
    if cfg is not None:
        if cfg.n != inst.n or not math.isclose(cfg.t, inst.t, rel_tol=1e-14) or cfg.eps != inst.eps:
            raise DomainError("instance does not match the configuration (t = n - omega n^(1/3))")
        delta_split = cfg.delta_split
    f = np.abs(f_map(inst, a0))
    split = inst.n - int(math.floor(delta_split * np.cbrt(inst.n)))
    split = min(max(split, 0), f.size)
    r1 = float(f[:split].max()) if split > 0 else 0.0
    r2 = float(f[split:].max()) if split < f.size else 0.0
    k = int(np.argmax(f))
    return ErrorProfile(float(f[k]), r1, r2, k, split)


def b_transform(cfg, a0, nu=None, ks=None):
    """Boundary-region coordinates b_k = k a0_{n+k} + 1 for negative k.

    Parameters
    ----------
    cfg : ApproxConfig
    a0 : DpiiState
    nu : PiiTrajectory, optional
        When given, the comparison value
        f(k / n^(1/3)) - omega_n / (3 n^(2/3)) - k / (2n) with f = x nu + 1
        is returned alongside.
    ks : array of int, optional
        Indices in [-floor(delta n^(1/3)), -2]; default is the whole window.

    Returns
    -------
    ndarray
        Structured array with fields ``k``, ``b`` and ``f_expr`` (NaN when
        ``nu`` is not given).
    """
    lo = -int(math.floor(cfg.delta_split * cfg.cbrt_n))
    if ks is None:
        ks = np.arange(lo, -1)
    ks = np.asarray(ks, dtype=int)
    if ks.size and (ks.min() < lo or ks.max() > -2):
        raise IndexRange(f"k must lie in [{lo}, -2]")
    a = np.asarray(getattr(a0, "a", a0))
    b = ks * a[cfg.n + ks] + 1.0
    out = np.zeros(ks.size, dtype=[("k", int), ("b", float), ("f_expr", float)])
    out["k"] = ks
    out["b"] = b
    out["f_expr"] = np.nan
    if nu is not None:
        x = ks / cfg.cbrt_n
        v, _ = nu.evaluate(x)
        out["f_expr"] = x * v + 1.0 - cfg.omega_n / (3.0 * cfg.cbrt_n ** 2) - ks / (2.0 * cfg.n)
    return out


def approximation_error(a_star, a0):
    """||a* - a0||_inf."""
    return float(np.max(np.abs(np.asarray(getattr(a_star, "a", a_star))
                               - np.asarray(getattr(a0, "a", a0)))))
