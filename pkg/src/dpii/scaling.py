"""Double-scaling experiment and figure data.

For t(n) = n - omega n^(1/3) the discrete solution satisfies
n^(1/3) a*_{n+k} -> nu_omega(x) as n -> inf with k / n^(1/3) -> x < 0,
where omega = 2^(-1/3) sigma and sigma is the pole in YY coordinates.
"""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .discrete import DpiiInstance, solve
from .errors import Degenerate, DomainError, NumericalFailure
from .pii import CBRT2, PiiForm, convert
from .tronquee import (X_STOP_MAX, b_of_pole, family_trajectory,
                       hastings_mcleod, lower_bounds_yy, nu_omega)

log = logging.getLogger(__name__)

DEFAULT_PROBES = (-0.5, -1.0, -2.0, -4.0)
#: No convergence rate accompanies the limit statement; -1/3 is the
#: n^(-2/3) ball radius of the approximate minimiser times the n^(1/3) rescale.
RATE_NOTE = "target slope -1/3 is inferred from the n^(-2/3) radius, not stated"


@dataclass(frozen=True)
class ScalingConfig:
    """YY pole ``sigma``, offset ``eps``, sizes and probe abscissae."""

    sigma: float
    eps: float = 1.0
    n_list: tuple = (2000, 8000, 32000)
    x_probe: tuple = DEFAULT_PROBES

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "x_probe", tuple(float(x) for x in self.x_probe))
        if list(self.n_list) != sorted(set(self.n_list)):
            raise DomainError("n_list must be strictly ascending")
        if not all(x < 0 for x in self.x_probe):
            raise DomainError("every probe must be negative")
        if not math.isfinite(self.sigma):
            raise DomainError("sigma must be finite")

    @property
    def omega(self):
        return self.sigma / CBRT2

    def t_of(self, n):
        return n - self.omega * float(np.cbrt(n))


@dataclass
class ScalingReport:
    config: ScalingConfig
    n_done: list = field(default_factory=list)
    t_values: list = field(default_factory=list)
    sup_errors: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    limit_values: list = field(default_factory=list)
    csv_paths: list = field(default_factory=list)
    missing: list = field(default_factory=list)
    slope: float = None
    note: str = RATE_NOTE

    def to_json(self, **extra):
        entries = [dict(n=n, t=t, sup_error=e, csv_path=p)
                   for n, t, e, p in zip(self.n_done, self.t_values, self.sup_errors, self.csv_paths)]
        d = dict(sigma=self.config.sigma, omega=self.config.omega, eps=self.config.eps,
                 x_probe=list(self.config.x_probe), limit=self.limit_values,
                 entries=entries, missing=self.missing, slope=self.slope, note=self.note)
        d.update(extra)
        return json.dumps(d, indent=2)


def slope_fit(pairs):
    """Least-squares slope of log(value) against log(n).

    Raises
    ------
    Degenerate
        With fewer than 3 pairs or when all n coincide.
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 3 or arr.shape[1] != 2:
        raise Degenerate("slope_fit needs at least three (n, value) pairs")
    n, v = arr[:, 0], arr[:, 1]
    if np.any(v <= 0) or np.any(n <= 0):
        raise DomainError("n and values must be positive")
    ln = np.log(n)
    if np.ptp(ln) == 0:
        raise Degenerate("all n are equal")
    lv = np.log(v)
    lc = ln - ln.mean()
    return float(np.dot(lc, lv - lv.mean()) / np.dot(lc, lc))


def limit_curve(omega, x, tol=1e-10, key=None):
    """nu_omega at the abscissae ``x`` (all negative)."""
    x = np.asarray(x, dtype=float)
    nu = nu_omega(omega, (min(float(x.min()), -20.0), float(x.max())), tol, key=key)
    return nu.evaluate(x)[0], nu


def run_scaling(cfg, tol=1e-10, out_dir=None, solve_tol=1e-12, comments=()):
    """Compare rescaled discrete solutions with the limit profile.

    For each n the instance (n, t(n), eps) is solved; at each probe x the
    index k = round(x n^(1/3)) gives the sample n^(1/3) a*_{n+k}, compared
    with nu_omega(k / n^(1/3)). Failed sizes are listed in ``missing``.
    """
    if any(n < 1000 for n in cfg.n_list):
        raise DomainError("every n must be at least 1000")
    key = b_of_pole(cfg.omega, tol)
    probes = np.asarray(cfg.x_probe)
    report = ScalingReport(cfg)
    report.limit_values = [float(v) for v in limit_curve(cfg.omega, probes, tol, key)[0]]
    nu = nu_omega(cfg.omega, (-20.0, -1e-3), tol, key=key)
    for n in cfg.n_list:
        c = float(np.cbrt(n))
        t = cfg.t_of(n)
        try:
            a = solve(DpiiInstance(n, t, cfg.eps), "AUTO", solve_tol).a
        except NumericalFailure as exc:
            log.warning("n=%d failed: %s", n, exc)
            report.missing.append(n)
            continue
        k = np.rint(probes * c).astype(int)
        xk = k / c
        scaled = c * a[n + k]
        limit = nu.evaluate(xk)[0]
        err = np.abs(scaled - limit)
        report.n_done.append(n)
        report.t_values.append(t)
        report.errors.append([float(e) for e in err])
        report.sup_errors.append(float(err.max()))
        path = None
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            path = os.path.join(out_dir, f"scaling_sigma{cfg.sigma:g}_n{n}.csv")
            with open(path, "w") as fh:
                for line in comments:
                    fh.write(f"# {line}\n")
                fh.write("x,k,scaled_a,nu,error\n")
                for row in zip(probes, k, scaled, limit, err):
                    fh.write("{:.17g},{:d},{:.17g},{:.17g},{:.17g}\n".format(*row))
        report.csv_paths.append(path)
        log.info("n=%d t=%.6f sup error %.3e (at x=%g)", n, t, err.max(), probes[np.argmax(err)])
    if len(report.n_done) >= 3:
        report.slope = slope_fit(list(zip(report.n_done, report.sup_errors)))
    return report


FIGURE_COLUMNS = ("x", "u", "bound_e", "bound_third", "sqrt_half")


def figure1_data(sigma, x_range=(-12.0, None), num=400, tol=1e-10):
    """Solution curve and lower bounds in YY coordinates.

    Parameters
    ----------
    sigma : float
        YY pole location; ``math.inf`` selects the pole-free solution.
    x_range : (lo, hi)
        ``hi`` defaults to min(sigma, 0) (minus 0.05 for a finite pole) and
        must lie left of the pole.

    Returns
    -------
    dict of ndarray
        Columns ``x``, ``u`` (the YY solution), ``bound_e``,
        ``bound_third`` and ``sqrt_half``. The bounds are only defined for
        x <= 0 and are NaN to the right of it.
    """
    lo, hi = x_range
    if hi is None:
        hi = min(sigma - 0.05, 0.0) if math.isfinite(sigma) else 0.0
    if not hi < sigma:
        raise DomainError("x_range must stay left of the pole")
    if not lo < hi:
        raise DomainError("empty x_range")
    ext = min(-12.0, lo / CBRT2 - 1.0)
    if math.isfinite(sigma):
        key = b_of_pole(sigma / CBRT2, tol)
        traj = family_trajectory(key.delta, key.x_left, X_STOP_MAX, tol, x_ext=ext)
    else:
        traj = hastings_mcleod(tol, x_ext=ext)
    yy = convert(traj, PiiForm.yy())
    x = np.linspace(lo, hi, num)
    u, _ = yy.evaluate(x)
    with np.errstate(invalid="ignore"):
        xm = np.where(x <= 0, x, np.nan)
        b1, b2 = lower_bounds_yy(xm)
        half = np.sqrt(-xm / 2.0)
    return dict(x=x, u=u, bound_e=b1, bound_third=b2, sqrt_half=half)


def write_figure_csv(path, data, comments=()):
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(FIGURE_COLUMNS) + "\n")
        for row in zip(*(data[c] for c in FIGURE_COLUMNS)):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
