"""Continuous Painleve II in three coordinate forms.

* ``YY``: yy'' = x yy + 2 yy^3
* ``U``:  u''  = 2 x u + 2 u^3,   u(x) = 2^(1/3) yy(2^(1/3) x)
* ``NU``: nu'' = 2 (x + omega) nu + 2 nu^3,   nu(x) = u(x + omega)

All three are ``y'' = p (x + shift) y + 2 y^3`` with (p, shift) = (1, 0),
(2, 0) and (2, omega).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .asymptotics import left_series, recessive_mode, tail_integral
from .errors import BoundaryPoint, DomainError, GridCoverage, StepFailure

log = logging.getLogger(__name__)

CBRT2 = float(np.cbrt(2.0))
SWITCH_AT = 10.0        # |u| at which integration moves to w = 1/u
W_STOP = 1e-3           # |w| at which the pole is located by its local series
H0 = 1e-3
#: Rightmost U-form abscissa at which the left expansion is trusted. The
#: optimally truncated series is good to ~2e-6 there, and the recessive mode
#: is still ~2e-5 so shooting amplitudes stay far above rounding.
LEFT_SERIES_LIMIT_U = -4.0


@dataclass(frozen=True)
class PiiForm:
    """Coordinate form tag, with ``omega`` for the shifted form."""

    tag: str
    omega: Optional[float] = None

    def __post_init__(self):
        if self.tag not in ("YY", "U", "NU"):
            raise DomainError(f"unknown form tag {self.tag!r}")
        if self.tag == "NU":
            if self.omega is None or not np.isfinite(self.omega):
                raise DomainError("NU form needs a finite omega")
        elif self.omega is not None:
            raise DomainError(f"{self.tag} form carries no omega")

    @classmethod
    def yy(cls):
        return cls("YY")

    @classmethod
    def u(cls):
        return cls("U")

    @classmethod
    def nu(cls, omega):
        return cls("NU", float(omega))

    @property
    def p(self):
        return 1.0 if self.tag == "YY" else 2.0

    @property
    def shift(self):
        return self.omega if self.tag == "NU" else 0.0

    def __str__(self):
        return f"NU(omega={self.omega!r})" if self.tag == "NU" else self.tag


def pii_rhs(form, x, u):
    """Second derivative prescribed by the chosen form at (x, u)."""
    return form.p * (x + form.shift) * u + 2.0 * u ** 3


def _recip_rhs(form, x, w, wp):
    return (2.0 * wp * wp - form.p * (x + form.shift) * w * w - 2.0) / w


# quintic Hermite basis on [0, 1]: values, slopes, curvatures at both ends
def _hermite5(t, h, f0, d0, s0, f1, d1, s1):
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
    h1 = t - 6 * t3 + 8 * t4 - 3 * t5
    h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5
    h3 = 0.5 * t3 - t4 + 0.5 * t5
    h4 = -4 * t3 + 7 * t4 - 3 * t5
    h5 = 10 * t3 - 15 * t4 + 6 * t5
    g0 = -30 * t2 + 60 * t3 - 30 * t4
    g1 = 1 - 18 * t2 + 32 * t3 - 15 * t4
    g2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4
    g3 = 1.5 * t2 - 4 * t3 + 2.5 * t4
    g4 = -12 * t2 + 28 * t3 - 15 * t4
    g5 = 30 * t2 - 60 * t3 + 30 * t4
    val = h0 * f0 + h1 * h * d0 + h2 * h * h * s0 + h3 * h * h * s1 + h4 * h * d1 + h5 * f1
    der = (g0 * f0 + g1 * h * d0 + g2 * h * h * s0 + g3 * h * h * s1 + g4 * h * d1 + g5 * f1) / h
    return val, der


@dataclass(frozen=True, eq=False)
class PiiTrajectory:
    """A sampled solution of one of the three forms.

    Attributes
    ----------
    form : PiiForm
    grid, value, deriv : ndarray
        Abscissae (strictly increasing), solution samples and derivatives.
    pole : float or None
        First blow-up location, when the integration ran into one.
    family_param : float or None
        Family parameter b of the solution, when known.
    """

    form: PiiForm
    grid: np.ndarray
    value: np.ndarray
    deriv: np.ndarray
    pole: Optional[float] = None
    family_param: Optional[float] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.value, dtype=float)
        d = np.asarray(self.deriv, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.shape != d.shape:
            raise DomainError("grid, value and deriv must be 1-d arrays of equal length")
        if g.size < 2 or np.any(np.diff(g) <= 0):
            raise DomainError("grid must be strictly increasing with at least two points")
        if self.pole is not None and not self.pole > g[-1]:
            raise DomainError("pole must lie beyond the last grid point")
        for name, arr in (("grid", g), ("value", v), ("deriv", d)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.grid.size

    @property
    def second(self):
        return pii_rhs(self.form, self.grid, self.value)

    def evaluate(self, x):
        """Interpolate (value, derivative) at ``x`` by quintic Hermite.

        Cells where the solution is large are interpolated in the reciprocal
        variable, which is smooth through the pole.
        """
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        g = self.grid
        if xv.size and (xv.min() < g[0] - 1e-12 * max(1.0, abs(g[0]))
                        or xv.max() > g[-1] + 1e-12 * max(1.0, abs(g[-1]))):
            raise GridCoverage(
                f"requested [{xv.min():.6g}, {xv.max():.6g}] outside grid "
                f"[{g[0]:.6g}, {g[-1]:.6g}]")
        i = np.clip(np.searchsorted(g, xv, side="right") - 1, 0, g.size - 2)
        x0, x1 = g[i], g[i + 1]
        h = x1 - x0
        t = np.clip((xv - x0) / h, 0.0, 1.0)
        u0, u1 = self.value[i], self.value[i + 1]
        d0, d1 = self.deriv[i], self.deriv[i + 1]
        big = (np.maximum(np.abs(u0), np.abs(u1)) > SWITCH_AT) & (np.minimum(np.abs(u0), np.abs(u1)) >= 1.0)
        s0 = pii_rhs(self.form, x0, u0)
        s1 = pii_rhs(self.form, x1, u1)
        val, der = _hermite5(t, h, u0, d0, s0, u1, d1, s1)
        if np.any(big):
            b = big
            w0, w1 = 1.0 / u0[b], 1.0 / u1[b]
            wp0, wp1 = -d0[b] * w0 * w0, -d1[b] * w1 * w1
            ws0 = _recip_rhs(self.form, x0[b], w0, wp0)
            ws1 = _recip_rhs(self.form, x1[b], w1, wp1)
            wv, wd = _hermite5(t[b], h[b], w0, wp0, ws0, w1, wp1, ws1)
            val = val.copy()
            der = der.copy()
            val[b] = 1.0 / wv
            der[b] = -wd / (wv * wv)
        if scalar:
            return float(val[0]), float(der[0])
        return val, der

    def restricted(self, x_lo=-np.inf, x_hi=np.inf):
        """Sub-trajectory on grid points within [x_lo, x_hi]; pole dropped if cut."""
        keep = (self.grid >= x_lo) & (self.grid <= x_hi)
        pole = self.pole if keep[-1] else None
        return PiiTrajectory(self.form, self.grid[keep], self.value[keep],
                             self.deriv[keep], pole, self.family_param, dict(self.meta))


def convert(traj, target):
    """Re-express a trajectory in another form.

    YY <-> U rescale by 2^(1/3); U <-> NU(omega) shift by omega. Conversions
    are exact maps of the samples.
    """
    src = traj.form
    if src == target:
        return traj
    # go through U
    g, v, d, pole = traj.grid, traj.value, traj.deriv, traj.pole
    if src.tag == "YY":
        g, v, d = g / CBRT2, CBRT2 * v, CBRT2 ** 2 * d
        pole = None if pole is None else pole / CBRT2
    elif src.tag == "NU":
        g = g + src.omega
        pole = None if pole is None else pole + src.omega
    if target.tag == "YY":
        g, v, d = g * CBRT2, v / CBRT2, d / CBRT2 ** 2
        pole = None if pole is None else pole * CBRT2
    elif target.tag == "NU":
        g = g - target.omega
        pole = None if pole is None else pole - target.omega
    return PiiTrajectory(target, g, v, d, pole, traj.family_param, dict(traj.meta))


def _to_u_coord(form, x):
    if form.tag == "YY":
        return x / CBRT2
    return x + form.shift


def asymptotic_init(form, x_left, b, terms=2):
    """Initial data from the left-end expansion plus the b-correction.

    Parameters
    ----------
    form : PiiForm
    x_left : float
        Starting abscissa in the form's own coordinate.
    b : float
        Family parameter. In YY form the correction is
        b (-x)^(-1/4) exp(-(2 sqrt2/3)(-x)^(3/2)); in U/NU form it is
        2^(1/3) b (-x)^(-1/4) exp(-(4/3)(-x)^(3/2)).
    terms : int or None
        Terms of the algebraic expansion (2 gives the classical two-term
        form); ``None`` selects optimal truncation.

    Returns
    -------
    (u, uprime) : tuple of float
    """
    xu = _to_u_coord(form, float(x_left))
    if xu > LEFT_SERIES_LIMIT_U + 1e-12:
        raise DomainError(
            f"x_left={x_left} lies right of the expansion's validity limit "
            f"(U-form abscissa {LEFT_SERIES_LIMIT_U})")
    if form.tag == "YY":
        X = float(x_left)
        z = -X
        u, up, _ = left_series(xu, terms)
        u, up = u / CBRT2, up / CBRT2 ** 2
        e = np.exp(-2.0 * np.sqrt(2.0) / 3.0 * z ** 1.5)
        u += b * z ** -0.25 * e
        up += b * (0.25 * z ** -1.25 + np.sqrt(2.0) * z ** 0.25) * e
        return float(u), float(up)
    u, up, _ = left_series(xu, terms)
    g, gp = recessive_mode(xu)
    return float(u + CBRT2 * b * g), float(up + CBRT2 * b * gp)


def pole_series_coeffs(p, x_pole, c4=0.0, order=8):
    """Coefficients c_0..c_order of u = -(1/xi) sum c_k xi^k about a pole.

    The pole sits at ``x_pole`` in the coordinate X of ``y'' = p X y + 2y^3``;
    xi = X - x_pole. Order 4 is resonant and carries the free ``c4``.
    """
    c = np.zeros(order + 1)
    c[0] = 1.0
    for k in range(1, order + 1):
        if k == 4:
            c[4] = c4
            continue
        # [c^3]_k without the 3 c_k contribution
        cube = 0.0
        for i in range(k + 1):
            for j in range(k + 1 - i):
                m = k - i - j
                if k in (i, j, m):
                    continue
                cube += c[i] * c[j] * c[m]
        rhs = p * x_pole * (c[k - 2] if k >= 2 else 0.0) + p * (c[k - 3] if k >= 3 else 0.0) + 2.0 * cube
        c[k] = rhs / ((k - 4) * (k + 1))
    return c


def refine_pole(form, x_s, u_s, up_s, tol=1e-12):
    """Locate the pole ahead of (x_s, u_s, up_s) from the local expansion.

    Solves w(xi) = r xi / P(xi) for xi = x_s - pole with r = -sign(u')
    (r = -1 is the u -> +inf, residue -1 case).
    """
    w = 1.0 / u_s
    wp = -up_s / (u_s * u_s)
    r = 1.0 if wp > 0 else -1.0
    X_s = _to_model(form, x_s)
    xi = r * w
    for _ in range(60):
        c = pole_series_coeffs(form.p, X_s - xi, 0.0, 7)
        P = np.polynomial.polynomial.polyval(xi, c)
        new = r * w * P
        if abs(new - xi) <= 0.1 * tol:
            xi = new
            break
        xi = new
    return x_s - xi


def _to_model(form, x):
    return x + form.shift


def _shoot(form, x0, u0, up0, x_stop, tol, stop_on_zero=False, stop_on_switch=False,
           max_steps=2_000_000):
    return kernels.rk_integrate(form.p, form.shift, float(x0), float(u0), float(up0),
                                float(x_stop), tol, tol, H0, SWITCH_AT, W_STOP,
                                bool(stop_on_zero), bool(stop_on_switch), int(max_steps))


def integrate(form, init, x_stop, tol=1e-10, max_steps=2_000_000):
    """Adaptive DP5(4) integration to ``x_stop`` or the first pole.

    Parameters
    ----------
    form : PiiForm
    init : tuple (x, u, uprime)
    x_stop : float
    tol : float
        Relative and absolute local error tolerance.

    Returns
    -------
    PiiTrajectory
        ``pole`` is set when a blow-up was met before ``x_stop``.

    Raises
    ------
    StepFailure
        When the step size collapses or the step cap is reached.
    """
    x0, u0, up0 = (float(v) for v in init)
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not x_stop > x0:
        raise DomainError("x_stop must exceed the initial abscissa")
    xs, us, ups, status = _shoot(form, x0, u0, up0, x_stop, tol, max_steps=max_steps)
    if status in (kernels.STEPFAIL, kernels.MAXSTEPS):
        raise StepFailure(f"integrator stalled (status {status}) at x={xs[-1]:.12g}",
                          x_last=float(xs[-1]))
    pole = None
    if status == kernels.POLE:
        pole = refine_pole(form, xs[-1], us[-1], ups[-1], tol=min(tol, 1e-12))
        if not pole > xs[-1]:
            # the last step went through the pole; drop samples past it
            keep = xs < pole
            xs, us, ups = xs[keep], us[keep], ups[keep]
    return PiiTrajectory(form, xs, us, ups, pole=pole, meta={"status": int(status)})


def residue_estimate(traj, distance=1e-2):
    """(x - pole) * u(x) at ``distance`` before the pole; tends to -1."""
    if traj.pole is None:
        raise DomainError("trajectory has no pole")
    x = traj.pole - distance
    u, _ = traj.evaluate(x)
    return (x - traj.pole) * u


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


def _cumulative_integral(traj_u):
    """Cumulative integral of u^2 + x over the grid cells (U coordinates)."""
    g = traj_u.grid
    a, bnd = g[:-1], g[1:]
    half = 0.5 * (bnd - a)
    mid = 0.5 * (bnd + a)
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals, _ = traj_u.evaluate(pts.ravel())
    vals = vals.reshape(pts.shape)
    cell = half * ((vals ** 2 + pts) * _GL_WEIGHTS[None, :]).sum(axis=1)
    return np.concatenate([[0.0], np.cumsum(cell)])


def identity_residual(traj, x):
    """Residual of (u')^2 + 2 int_{-inf}^x (u^2 + s) ds = (u^2 + x)^2.

    The tail left of the first grid point comes from the left expansion;
    the rest is 6-point Gauss-Legendre on each cell of the Hermite
    interpolant. U or NU trajectories only (NU is shifted to U coordinates).
    """
    if traj.form.tag == "YY":
        raise DomainError("identity_residual needs a U or NU trajectory")
    tu = convert(traj, PiiForm.u())
    xs = np.atleast_1d(np.asarray(x, dtype=float)) + traj.form.shift
    g = tu.grid
    if g[0] > -8.0:
        raise DomainError("trajectory must start at or left of x = -8 (U coordinates)")
    if np.any(xs < g[0]) or np.any(xs > g[-1]):
        raise DomainError("x outside the trajectory grid")
    cum = _cumulative_integral(tu)
    tail = tail_integral(g[0])
    out = np.empty_like(xs)
    for j, xv in enumerate(xs):
        i = int(np.clip(np.searchsorted(g, xv, side="right") - 1, 0, g.size - 2))
        a = g[i]
        if xv > a:
            half = 0.5 * (xv - a)
            pts = a + half * (1.0 + _GL_NODES)
            vals, _ = tu.evaluate(pts)
            part = half * np.dot(vals ** 2 + pts, _GL_WEIGHTS)
        else:
            part = 0.0
        u, up = tu.evaluate(xv)
        out[j] = up * up + 2.0 * (tail + cum[i] + part) - (u * u + xv) ** 2
    return float(out[0]) if np.ndim(x) == 0 else out


REGION_SIGN = {"I": -1, "II": +1, "III": -1, "IV": +1}


def region_classify(x, u, guard=1e-12):
    """Region of the (x, u) plane cut by u = 0 and x + u^2 = 0.

    I: u > 0, x + u^2 < 0;  II: u > 0, x + u^2 > 0;
    III: u < 0, x + u^2 > 0;  IV: u < 0, x + u^2 < 0.
    ``REGION_SIGN`` gives the sign of the U-form right-hand side 2u(x + u^2).
    """
    q = x + u * u
    if abs(u) <= guard or abs(q) <= guard:
        raise BoundaryPoint(f"({x}, {u}) lies on a region boundary")
    if u > 0:
        return "II" if q > 0 else "I"
    return "III" if q > 0 else "IV"


def yprime_bound_margin(traj):
    """min of (u^2 + x) - u' before the first crossing of u=0 or u^2+x=0.

    Positive when the derivative bound holds on that stretch (U/NU forms).
    """
    tu = convert(traj, PiiForm.u())
    u, up, x = tu.value, tu.deriv, tu.grid
    q = u * u + x
    s_u, s_q = np.sign(u), np.sign(q)
    cross = np.nonzero((s_u[1:] != s_u[0]) | (s_q[1:] != s_q[0]))[0]
    end = cross[0] + 1 if cross.size else x.size
    return float(np.min(q[:end] - up[:end]))


def write_trajectory_csv(path, traj, comments=()):
    """Write ``x,u,uprime`` rows (17 significant digits)."""
    with open(path, "w") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(f"# form={traj.form.tag}")
        if traj.form.tag == "NU":
            fh.write(f" omega={traj.form.omega!r}")
        fh.write("\n")
        fh.write("x,u,uprime\n")
        for xv, uv, dv in zip(traj.grid, traj.value, traj.deriv):
            fh.write(f"{xv:.17g},{uv:.17g},{dv:.17g}\n")
        if traj.pole is not None:
            fh.write(f"# pole={traj.pole:.17g}\n")


def read_trajectory_csv(path):
    rows, pole, form = [], None, PiiForm.u()
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("pole="):
                    pole = float(body[5:])
                elif body.startswith("form="):
                    parts = dict(kv.split("=", 1) for kv in body.split())
                    form = PiiForm(parts["form"], float(parts["omega"]) if "omega" in parts else None)
                continue
            if line.startswith("x,"):
                continue
            rows.append([float(v) for v in line.split(",")])
    arr = np.array(rows)
    return PiiTrajectory(form, arr[:, 0], arr[:, 1], arr[:, 2], pole=pole)
