"""Shooting for the one-parameter family u_b with sqrt asymptotics at -inf.

Every member is launched from the anchor ``x_left`` (U form) with data

    u  = S(x_left) + A,    u' = S'(x_left) + A * g'(x_left) / g(x_left)

where S is the optimally truncated left expansion and g the recessive mode.
The amplitude ``A = A_hm + delta`` is measured from the numerically located
separatrix ``A_hm`` (the Hastings-McLeod member), so ``delta = 0`` is b = 0
exactly and ``delta = b * 2^(1/3) g(x_left)``.

Left of the anchor the same formula (with g(x)/g(x_left)) is sampled
directly, giving trajectories that start far out at ``x_ext``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .asymptotics import left_series, recessive_mode
from .errors import BracketFailure, DomainError, NoPole, StepFailure
from .pii import (CBRT2, PiiForm, PiiTrajectory, _shoot, convert, integrate,
                  pole_series_coeffs)

log = logging.getLogger(__name__)

X_ANCHOR = -4.5
X_EXT = -12.0
X_RIGHT = 8.0
X_STOP_MAX = 40.0
ANCHOR_STEP = 2.0
ANCHOR_MIN = -16.0
AMPLITUDE_CAP = 1e-3    # relative to the leading term sqrt(-x_left)
BISECT_CAP = 200
# far-right poles need amplitudes near the rounding level of the anchor value,
# which limits how closely a target can be hit; key.omega records the actual pole
POLE_RESOLUTION = 1e-7


@dataclass(frozen=True)
class TronqueeKey:
    """A family member: b, its shooting amplitude and its first pole."""

    b: float
    delta: float
    omega: float
    x_left: float

    def __post_init__(self):
        if self.b < 0:
            raise DomainError("b must be non-negative")


def delta_link(x_left):
    """Factor c with delta = b * c, i.e. 2^(1/3) (-x)^(-1/4) exp(-4/3 (-x)^(3/2))."""
    g, _ = recessive_mode(x_left)
    return CBRT2 * float(g)


def hm_key(x_left=X_ANCHOR):
    return TronqueeKey(0.0, 0.0, math.inf, float(x_left))


def _anchor_data(x_left, amplitude):
    s, sp, _ = left_series(x_left, None)
    g, gp = recessive_mode(x_left)
    return s + amplitude, sp + amplitude * float(gp / g)


def _classify(x_left, amplitude, tol, x_right):
    u0, up0 = _anchor_data(x_left, amplitude)
    form = PiiForm.u()
    xs, us, ups, status = _shoot(form, x_left, u0, up0, x_right, tol,
                                 stop_on_zero=True, stop_on_switch=True)
    if status == kernels.BLOWUP:
        return 1
    if status == kernels.ZERO:
        return -1
    if status == kernels.REACHED:
        return 1 if ups[-1] > 0 else -1
    raise StepFailure(f"separatrix shooting stalled at x={xs[-1]:.6g}", float(xs[-1]))


@lru_cache(maxsize=64)
def separatrix(x_left=X_ANCHOR, tol=1e-10, x_right=X_RIGHT):
    """Bracket (A_lo, A_hi) of the separatrix amplitude at ``x_left``.

    A_hi blows up and A_lo crosses zero before ``x_right``; bisection runs
    until the two are adjacent floating-point numbers (or the depth cap).
    """
    lead = math.sqrt(-x_left)
    lo, hi = -AMPLITUDE_CAP * lead, AMPLITUDE_CAP * lead
    if _classify(x_left, lo, tol, x_right) != -1 or _classify(x_left, hi, tol, x_right) != 1:
        raise BracketFailure("separatrix bracket does not straddle the two behaviours")
    for _ in range(BISECT_CAP):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _classify(x_left, mid, tol, x_right) > 0:
            hi = mid
        else:
            lo = mid
    log.debug("separatrix at x_left=%g: [%r, %r]", x_left, lo, hi)
    return lo, hi


def family_init(delta, x_left=X_ANCHOR, tol=1e-10):
    """Initial data (x_left, u, u') of the member with amplitude ``delta``."""
    _, hi = separatrix(x_left, tol)
    u0, up0 = _anchor_data(x_left, hi + delta)
    return x_left, u0, up0


def _extension_grid(x_ext, x_left):
    # geometric in |x| (ratio 1.01), so the spacing tracks the solution's scale
    if x_ext >= x_left:
        return np.empty(0)
    count = int(math.ceil(math.log(x_ext / x_left) / math.log(1.01)))
    pts = x_left * np.geomspace(1.0, x_ext / x_left, count + 1)
    return pts[::-1][:-1]


def _extension(x, x_left, amplitude):
    s, sp, _ = left_series(x, None)
    g, gp = recessive_mode(x)
    g0, _ = recessive_mode(x_left)
    return s + amplitude * g / g0, sp + amplitude * gp / g0


def family_trajectory(delta, x_left=X_ANCHOR, x_stop=X_STOP_MAX, tol=1e-10, x_ext=X_EXT):
    """U-form trajectory of the member with amplitude ``delta``.

    Integrated from ``x_left`` to ``x_stop`` or the first pole, with the left
    expansion sampled on [x_ext, x_left).
    """
    _, hi = separatrix(x_left, tol)
    amp = hi + delta
    traj = integrate(PiiForm.u(), (x_left,) + _anchor_data(x_left, amp), x_stop, tol)
    ext = _extension_grid(min(x_ext, x_left), x_left)
    if ext.size:
        ev, ed = _extension(ext, x_left, amp)
        grid = np.concatenate([ext, traj.grid])
        value = np.concatenate([ev, traj.value])
        deriv = np.concatenate([ed, traj.deriv])
    else:
        grid, value, deriv = traj.grid, traj.value, traj.deriv
    b = delta / delta_link(x_left)
    meta = dict(traj.meta, x_left=x_left, delta=delta, amplitude=amp)
    return PiiTrajectory(PiiForm.u(), grid, value, deriv, traj.pole, b, meta)


def _check_amplitude(delta, x_left):
    if not delta < AMPLITUDE_CAP * math.sqrt(-x_left):
        raise DomainError(f"delta={delta:g} too large for the expansion at x_left={x_left}")


def pole_of(delta, x_left=X_ANCHOR, tol=1e-10, x_stop_max=X_STOP_MAX):
    """First pole of the member with amplitude ``delta`` > 0.

    Raises
    ------
    NoPole
        If the solution is still regular at ``x_stop_max``.
    """
    if not delta > 0:
        raise DomainError("delta must be positive")
    _check_amplitude(delta, x_left)
    x0, u0, up0 = family_init(delta, x_left, tol)
    xs, us, ups, status = _shoot(PiiForm.u(), x0, u0, up0, x_stop_max, tol,
                                 stop_on_zero=False, stop_on_switch=False)
    if status == kernels.POLE:
        from .pii import refine_pole
        return float(refine_pole(PiiForm.u(), xs[-1], us[-1], ups[-1], min(tol, 1e-12)))
    if status == kernels.REACHED:
        raise NoPole(f"no pole before x={x_stop_max}", x_stop_max)
    raise StepFailure(f"pole shooting stalled at x={xs[-1]:.6g}", float(xs[-1]))


def _pole_or_inf(delta, x_left, tol, x_stop_max):
    try:
        return pole_of(delta, x_left, tol, x_stop_max)
    except NoPole:
        return math.inf


@dataclass(frozen=True)
class PoleMap:
    """Immutable collection of computed (b, delta, omega, x_left) tuples."""

    keys: tuple = ()

    def with_keys(self, *keys):
        merged = {(k.x_left, k.delta): k for k in self.keys + tuple(keys)}
        return PoleMap(tuple(sorted(merged.values(), key=lambda k: (k.x_left, k.delta))))

    def bracket(self, omega, x_left):
        """Tightest (delta_lo, delta_hi) from stored entries, or None."""
        lo, hi = None, None
        for k in self.keys:
            if k.x_left != x_left or k.delta <= 0:
                continue
            if k.omega > omega and (lo is None or k.delta > lo):
                lo = k.delta
            if k.omega < omega and (hi is None or k.delta < hi):
                hi = k.delta
        if lo is None or hi is None or not lo < hi:
            return None
        return lo, hi

    def write_csv(self, path, comments=()):
        with open(path, "w") as fh:
            for c in comments:
                fh.write(f"# {c}\n")
            fh.write("b,delta,omega,x_left\n")
            for k in self.keys:
                fh.write(f"{k.b:.17g},{k.delta:.17g},{k.omega:.17g},{k.x_left:.17g}\n")

    @classmethod
    def read_csv(cls, path):
        keys = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or line.startswith("b,"):
                    continue
                b, d, w, xl = (float(v) for v in line.split(","))
                keys.append(TronqueeKey(b, d, w, xl))
        return cls().with_keys(*keys)


def b_of_pole(omega_target, tol=1e-10, x_left=None, cache=None, trace=None):
    """Family member whose first pole is at ``omega_target``.

    Bisection on log(delta); the anchor moves left by 2 whenever the target
    needs an amplitude above the expansion's validity cap.

    Parameters
    ----------
    omega_target : float
    tol : float
        Pole-location tolerance (also used for the integrator).
    x_left : float, optional
        Starting anchor (default -4.5).
    cache : PoleMap, optional
        Previously computed keys used as warm-start brackets.
    trace : list, optional
        Receives every (x_left, delta, omega) bisection iterate.

    Returns
    -------
    TronqueeKey
    """
    if not math.isfinite(omega_target):
        raise DomainError("omega_target must be finite")
    x_left = X_ANCHOR if x_left is None else float(x_left)
    while True:
        lead = math.sqrt(-x_left)
        d_max = AMPLITUDE_CAP * lead * (1.0 - 1e-12)
        d_min = 1e-300 * lead
        w_max = _pole_or_inf(d_max, x_left, tol, X_STOP_MAX)
        if trace is not None:
            trace.append((x_left, d_max, w_max))
        if omega_target < w_max:
            if x_left - ANCHOR_STEP < ANCHOR_MIN:
                raise BracketFailure(f"omega={omega_target} is left of every reachable pole")
            x_left -= ANCHOR_STEP
            log.info("moving shooting anchor to x_left=%g", x_left)
            continue
        break
    w_min = _pole_or_inf(d_min, x_left, tol, X_STOP_MAX)
    if not omega_target < w_min:
        raise BracketFailure(
            f"omega={omega_target} is right of the smallest-amplitude pole {w_min}")
    lo, hi = math.log(d_min), math.log(d_max)
    warm = cache.bracket(omega_target, x_left) if cache is not None else None
    if warm is not None:
        lo, hi = math.log(warm[0]), math.log(warm[1])
    best = None
    for _ in range(BISECT_CAP):
        mid = 0.5 * (lo + hi)
        delta = math.exp(mid)
        w = _pole_or_inf(delta, x_left, tol, X_STOP_MAX)
        if trace is not None:
            trace.append((x_left, delta, w))
        if best is None or abs(w - omega_target) < abs(best[1] - omega_target):
            best = (delta, w)
        if abs(w - omega_target) < tol:
            break
        if w > omega_target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    delta, w = best
    miss = abs(w - omega_target)
    if not miss < max(tol, POLE_RESOLUTION):
        raise BracketFailure(
            f"bisection stalled: best pole {w!r} for target {omega_target!r}")
    if miss >= tol:
        log.warning("pole %r resolved only to %.2g (amplitude at rounding level)", omega_target, miss)
    return TronqueeKey(delta / delta_link(x_left), delta, w, x_left)


def hastings_mcleod(tol=1e-10, x_left=X_ANCHOR, x_ext=X_EXT, x_right=X_RIGHT, rel_gap=1e-3):
    """The pole-free separatrix (U form), truncated where it stays resolved.

    Both bracketing shots are integrated; the returned trajectory is the
    upper one, cut where the two differ by more than ``rel_gap`` relatively.
    """
    lo_amp, hi_amp = separatrix(x_left, tol, x_right)
    hi = family_trajectory(0.0, x_left, x_right, tol, x_ext)
    u0, up0 = _anchor_data(x_left, lo_amp)
    xs, us, _, _ = _shoot(PiiForm.u(), x_left, u0, up0, x_right, tol, stop_on_zero=True)
    cut = min(hi.grid[-1], xs[-1])
    sel = (hi.grid >= x_left) & (hi.grid <= cut)
    u_lo = np.interp(hi.grid[sel], xs, us)
    gap = np.abs(hi.value[sel] - u_lo) > rel_gap * np.abs(hi.value[sel])
    if np.any(gap):
        cut = hi.grid[sel][np.argmax(gap)]
    out = hi.restricted(x_hi=cut)
    meta = dict(out.meta, amplitude_lo=lo_amp, amplitude_hi=hi_amp, resolved_to=cut)
    return PiiTrajectory(out.form, out.grid, out.value, out.deriv, None, 0.0, meta)


def _with_endpoints(traj, x_lo, x_hi):
    """Restrict to [x_lo, x_hi] with the endpoints added by interpolation."""
    inner = (traj.grid > x_lo) & (traj.grid < x_hi)
    ends = np.array([x_lo, x_hi])
    ev, ed = traj.evaluate(ends)
    grid = np.concatenate([[x_lo], traj.grid[inner], [x_hi]])
    value = np.concatenate([[ev[0]], traj.value[inner], [ev[1]]])
    deriv = np.concatenate([[ed[0]], traj.deriv[inner], [ed[1]]])
    return PiiTrajectory(traj.form, grid, value, deriv, None, traj.family_param, dict(traj.meta))


def nu_omega(omega, grid_spec=(-20.0, -0.05), tol=1e-10, key=None, cache=None):
    """nu_omega(x) = u_{b(omega)}(x + omega), tagged NU(omega).

    Parameters
    ----------
    omega : float
        Pole location of the U-form member.
    grid_spec : (x_start, x_end)
        Range of the returned trajectory; ``x_end`` must be negative.
    key : TronqueeKey, optional
        Precomputed member (skips the pole search).
    """
    x_start, x_end = float(grid_spec[0]), float(grid_spec[1])
    if not x_end < 0:
        raise DomainError("grid must end strictly below the pole at 0")
    if not x_start < x_end:
        raise DomainError("empty grid range")
    if key is None:
        key = b_of_pole(omega, tol, cache=cache)
    full = family_trajectory(key.delta, key.x_left, X_STOP_MAX, tol,
                             x_ext=min(X_EXT, x_start + omega - 1.0))
    nu = convert(full, PiiForm.nu(omega))
    out = _with_endpoints(nu, x_start, x_end)
    meta = dict(out.meta, key=key, pole_offset=(full.pole - omega) if full.pole is not None else None)
    return PiiTrajectory(out.form, out.grid, out.value, out.deriv, None, key.b, meta)


@dataclass(frozen=True)
class NuSeries:
    """Pole expansion nu(x) = -(1/x)(1 + sum_{k>=2} c_k x^k) about x = 0.

    ``coeffs`` holds c_2..c_K; c_4 is the free parameter.
    """

    omega: float
    coeffs: np.ndarray
    free_param: float

    @classmethod
    def build(cls, omega, free_param=0.0, order=10):
        c = pole_series_coeffs(2.0, omega, free_param, order)
        return cls(float(omega), c[2:].copy(), float(free_param))

    def full(self):
        return np.concatenate([[1.0, 0.0], self.coeffs])


NU_SERIES_RADIUS = 0.3


def _series_guard(x):
    if not (0 < abs(x) < NU_SERIES_RADIUS):
        raise DomainError(f"|x|={abs(x):g} outside (0, {NU_SERIES_RADIUS})")


def nu_series(series, x):
    """Truncated pole expansion of nu_omega at x."""
    _series_guard(x)
    return -np.polynomial.polynomial.polyval(x, series.full()) / x


def f_series(series, x):
    """f_omega(x) = x nu_omega(x) + 1 from the truncated expansion."""
    _series_guard(x)
    return 1.0 - np.polynomial.polynomial.polyval(x, series.full())


def f_ode_residual(omega, x, f, fprime, fsecond):
    """x^2 f'' - 2x f' - 2(f - 1)(f^2 - 2f + x^2 (x + omega))."""
    return x * x * fsecond - 2.0 * x * fprime - 2.0 * (f - 1.0) * (f * f - 2.0 * f + x * x * (x + omega))


def f_from_nu(traj, x):
    """f = x nu + 1 and its first two derivatives from a NU trajectory."""
    if traj.form.tag != "NU":
        raise DomainError("f_from_nu needs an NU trajectory")
    nu, nup = traj.evaluate(x)
    nupp = 2.0 * (x + traj.form.omega) * nu + 2.0 * nu ** 3
    return x * nu + 1.0, nu + x * nup, 2.0 * nup + x * nupp


def fit_free_param(traj, window=(-0.25, -0.05), order=10, samples=41):
    """Least-squares estimate of the resonant coefficient c_4 from a NU trajectory."""
    omega = traj.form.omega
    xs = np.linspace(window[0], window[1], samples)
    f_data = f_from_nu(traj, xs)[0]

    def resid(c4):
        s = NuSeries.build(omega, c4, order)
        return np.array([f_series(s, x) for x in xs]) - f_data

    c4 = 0.0
    for _ in range(8):
        r0 = resid(c4)
        jac = (resid(c4 + 1e-4) - r0) / 1e-4
        step = -np.dot(jac, r0) / np.dot(jac, jac)
        c4 += step
        if abs(step) < 1e-13:
            break
    return c4


class BoundMargins(NamedTuple):
    """Lower-bound margins of a trajectory.

    ``min_margin``/``argmin_x`` use the sqrt(1 - 4x^3) bound (U form) with
    the sqrt(-x/3) branch; ``alt_*`` use sqrt(1 - 2x^3) instead.
    """

    min_margin: float
    argmin_x: float
    alt_min_margin: float
    alt_argmin_x: float


def e_function(x, coeff=4.0):
    """2 / (1 + sqrt(1 - coeff x^3))."""
    return 2.0 / (1.0 + np.sqrt(1.0 - coeff * np.asarray(x, dtype=float) ** 3))


def lower_bounds_u(x, coeff=4.0):
    """U-form lower bounds (sqrt(-x (1 - e(x))), sqrt(-x/3)) for x <= 0."""
    x = np.asarray(x, dtype=float)
    s = np.sqrt(1.0 - coeff * x ** 3)
    b1 = np.sqrt(-x) * np.sqrt((s - 1.0) / (s + 1.0))
    b2 = np.sqrt(-x / 3.0)
    return b1, b2


def lower_bounds_yy(x):
    """YY-form lower bounds sqrt(-x/2) sqrt(...(1-2x^3)...) and sqrt(-x/6)."""
    x = np.asarray(x, dtype=float)
    s = np.sqrt(1.0 - 2.0 * x ** 3)
    return np.sqrt(-x / 2.0) * np.sqrt((s - 1.0) / (s + 1.0)), np.sqrt(-x / 6.0)


def lower_bound_margin(traj, x_range=None):
    """Minimum of u - max(lower bounds) over grid points with x <= min(pole, 0).

    Parameters
    ----------
    traj : PiiTrajectory
        Any form; bounds are applied in U coordinates (they map onto the YY
        bounds exactly under the rescaling).
    x_range : (lo, hi), optional
        Explicit window in the trajectory's coordinate; must not extend past
        min(pole, 0).

    Returns
    -------
    BoundMargins
    """
    tu = convert(traj, PiiForm.u())
    pole_u = tu.pole if tu.pole is not None else math.inf
    if "key" in traj.meta:
        pole_u = traj.meta["key"].omega
    limit_u = min(pole_u, 0.0)
    sel = tu.grid <= limit_u
    if x_range is not None:
        lo_u = float(np.ravel(convert_x(traj.form, [x_range[0]]))[0])
        hi_u = float(np.ravel(convert_x(traj.form, [x_range[1]]))[0])
        if hi_u > limit_u + 1e-12:
            raise DomainError("x_range extends past min(pole, 0)")
        sel &= (tu.grid >= lo_u) & (tu.grid <= hi_u)
    if not np.any(sel):
        raise DomainError("no grid points in the admissible range")
    x = tu.grid[sel]
    u = tu.value[sel]
    back = traj.grid[sel]
    res = []
    for coeff in (4.0, 2.0):
        b1, b2 = lower_bounds_u(x, coeff)
        m = u - np.maximum(b1, b2)
        i = int(np.argmin(m))
        res.extend([float(m[i]), float(back[i])])
    return BoundMargins(*res)


def convert_x(form, x):
    """Map abscissae of ``form`` to U coordinates."""
    x = np.asarray(x, dtype=float)
    if form.tag == "YY":
        return x / CBRT2
    return x + form.shift


def monotonicity_check(key1, key2, grid_spec, tol=1e-10):
    """min over the grid of u_{b1} - u_{b2} (U form).

    ``grid_spec`` is (x_lo, x_hi, num). Where both members are given by the
    left expansion (x < x_left, shared anchor) the gap is the exact
    difference of recessive-mode amplitudes, which stays representable even
    when it is far below the rounding level of u itself.
    """
    x_lo, x_hi, num = grid_spec
    if key1.b < key2.b:
        raise DomainError("key1.b must be at least key2.b")
    if not x_hi < key1.omega:
        raise DomainError("grid must stay left of omega(b1)")
    xs = np.linspace(x_lo, x_hi, int(num))
    if key1 == key2:
        return 0.0
    gaps = np.empty_like(xs)
    same = key1.x_left == key2.x_left
    left = xs < key1.x_left if same else np.zeros(xs.shape, bool)
    if np.any(left):
        g, _ = recessive_mode(xs[left])
        g0, _ = recessive_mode(key1.x_left)
        gaps[left] = (key1.delta - key2.delta) * g / g0
    right = ~left
    if np.any(right):
        ext = min(X_EXT, x_lo - 1.0)
        t1 = family_trajectory(key1.delta, key1.x_left, X_STOP_MAX, tol, x_ext=ext)
        t2 = family_trajectory(key2.delta, key2.x_left, X_STOP_MAX, tol, x_ext=ext)
        gaps[right] = t1.evaluate(xs[right])[0] - t2.evaluate(xs[right])[0]
    return float(np.min(gaps))
