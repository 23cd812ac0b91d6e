"""The discrete Painleve II boundary-value problem.

Unknowns a_0..a_{n-2} with a_{-1} = a_{n-1} = 1 satisfy

    a_{k+1} + a_{k-1} = 2 w_k a_k / (1 - a_k^2),    w_k = (k + eps) / t.

They are the critical points of the energy

    H(a) = -sum_k w_k log(1 - a_k^2) - sum_{k=-1}^{n-2} a_k a_{k+1},

which is strictly convex in s_j = a_{j-1}^2. Newton iteration works on the
polynomial map F_k = (1 - a_k^2)(a_{k+1} + a_{k-1}) - 2 w_k a_k.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, NoConvergence, SingularPivot

log = logging.getLogger(__name__)

#: Iterates are clamped into [CLAMP_LO, 1 - CLAMP_HI]. The lower floor is far
#: below 1e-12 because for t < n the solution decays geometrically past
#: k ~ t and legitimately has entries many orders smaller than that.
CLAMP_LO = 1e-300
CLAMP_HI = 1e-12
MAX_ITER = 500
PIVOT_GUARD = 1e-300


@dataclass(frozen=True)
class DpiiInstance:
    """Problem size ``n``, coupling ``t`` and offset ``eps``."""

    n: int
    t: float
    eps: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n}")
        if not self.t > 0 or not np.isfinite(self.t):
            raise DomainError(f"t must be positive, got {self.t}")
        if not self.eps > 0 or not np.isfinite(self.eps):
            raise DomainError(f"eps must be positive, got {self.eps}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "eps", float(self.eps))

    @property
    def size(self):
        return self.n - 1

    def weights(self):
        """(k + eps) / t for k = 0..n-2."""
        return (np.arange(self.n - 1) + self.eps) / self.t

    def to_json(self, path=None, **extra):
        text = json.dumps(dict(n=self.n, t=self.t, eps=self.eps, **extra), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_json(cls, text_or_path):
        text = text_or_path
        if not text.lstrip().startswith("{"):
            with open(text_or_path) as fh:
                text = fh.read()
        d = json.loads(text)
        return cls(d["n"], d["t"], d["eps"])


@dataclass(frozen=True)
class DpiiState:
    """Candidate vector a_0..a_{n-2}.

    A validated state has every entry in (0, 1); ``DpiiState.raw`` skips the
    check for intermediate iterates and constructed approximations.
    """

    a: np.ndarray
    validated: bool = True

    def __post_init__(self):
        a = np.array(self.a, dtype=float, copy=True).ravel()
        if self.validated and not np.all((a > 0) & (a < 1)):
            raise DomainError("validated state needs every a_k in (0, 1)")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @classmethod
    def raw(cls, a):
        return cls(a, validated=False)

    def __len__(self):
        return self.a.size

    @property
    def s(self):
        """s-coordinates s_1..s_{n-1} (s_j = a_{j-1}^2)."""
        return self.a ** 2

    @property
    def interior(self):
        return bool(np.all((self.a > 0) & (self.a < 1)))

    def write_csv(self, path, comments=()):
        with open(path, "w") as fh:
            for c in comments:
                fh.write(f"# {c}\n")
            fh.write("k,a_k\n")
            for k, v in enumerate(self.a):
                fh.write(f"{k},{v:.17g}\n")

    @classmethod
    def read_csv(cls, path, validated=True):
        vals = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or line.startswith("k,"):
                    continue
                k, v = line.split(",")
                if int(k) != len(vals):
                    raise ValueError(f"row index {k} out of order in {path}")
                vals.append(float(v))
        return cls(np.array(vals), validated)


@dataclass(frozen=True)
class TridiagMatrix:
    """Tridiagonal matrix stored by its three bands."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).ravel()
        lo = np.asarray(self.sub, dtype=float).ravel()
        up = np.asarray(self.sup, dtype=float).ravel()
        if lo.size != max(d.size - 1, 0) or up.size != lo.size:
            raise ValueError("band lengths must be (m-1, m, m-1)")
        for name, v in (("sub", lo), ("diag", d), ("sup", up)):
            v = v.copy()
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def size(self):
        return self.diag.size

    @property
    def symmetric(self):
        return bool(np.array_equal(self.sub, self.sup))

    def to_dense(self):
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[1:] += self.sub * x[:-1]
        y[:-1] += self.sup * x[1:]
        return y

    def row_margins(self):
        """|m_kk| - sum_{j != k} |m_kj| for every row."""
        off = np.zeros(self.size)
        off[1:] += np.abs(self.sub)
        off[:-1] += np.abs(self.sup)
        return np.abs(self.diag) - off

    def scale_rows(self, r):
        """diag(r) @ self."""
        r = np.asarray(r, dtype=float)
        return TridiagMatrix(self.sub * r[1:], self.diag * r, self.sup * r[:-1])


def _padded(a):
    return np.concatenate(([1.0], a, [1.0]))


def _neighbours(a):
    p = _padded(a)
    return p[2:] + p[:-2]


def _require_interior(a, what="a_k"):
    if not np.all((a > 0) & (a < 1)):
        raise DomainError(f"every {what} must lie in (0, 1)")


def hamiltonian(inst, state, coords="A"):
    """Energy in a-coordinates (``"A"``) or s-coordinates (``"S"``).

    In s-coordinates s_j = a_{j-1}^2 (j = 1..n-1, s_0 = s_n = 1) and

        H~(s) = -sum_j ((j - 1 + eps)/t) log(1 - s_j) - sum_{j=1}^{n} sqrt(s_j s_{j-1}),

    which equals H(a) identically.
    """
    a = np.asarray(getattr(state, "a", state), dtype=float)
    w = inst.weights()
    if coords == "A":
        if not np.all((a >= 0) & (a < 1)):
            raise DomainError("hamiltonian needs every a_k in [0, 1)")
        p = _padded(a)
        return float(-np.sum(w * np.log1p(-a * a)) - np.sum(p[:-1] * p[1:]))
    if coords == "S":
        s = a * a if hasattr(state, "a") else a
        return hamiltonian_s(inst, s)
    raise ValueError(f"coords must be 'A' or 'S', got {coords!r}")


def hamiltonian_s(inst, s):
    """H~ evaluated directly on s = (s_1..s_{n-1})."""
    s = np.asarray(s, dtype=float)
    if not np.all((s >= 0) & (s < 1)):
        raise DomainError("hamiltonian needs every s_j in [0, 1)")
    r = np.sqrt(_padded(s))
    return float(-np.sum(inst.weights() * np.log1p(-s)) - np.sum(r[:-1] * r[1:]))


def gradient(inst, state):
    """dH/da_k = 2 w_k a_k / (1 - a_k^2) - a_{k+1} - a_{k-1}."""
    a = np.asarray(getattr(state, "a", state), dtype=float)
    _require_interior(a)
    return 2.0 * inst.weights() * a / (1.0 - a * a) - _neighbours(a)


def gradient_s(inst, s):
    """dH~/ds_j = w_j / (1 - s_j) - (sqrt(s_{j-1}) + sqrt(s_{j+1})) / (2 sqrt(s_j))."""
    s = np.asarray(s, dtype=float)
    _require_interior(s, "s_j")
    r = np.sqrt(_padded(s))
    return inst.weights() / (1.0 - s) - 0.5 * (r[:-2] + r[2:]) / r[1:-1]


def f_map(inst, state):
    """F_k = (1 - a_k^2)(a_{k+1} + a_{k-1}) - 2 w_k a_k, defined for all real a."""
    a = np.asarray(getattr(state, "a", state), dtype=float)
    return (1.0 - a * a) * _neighbours(a) - 2.0 * inst.weights() * a


def f_jacobian(inst, state):
    """Tridiagonal F'(a): off-diagonals 1 - a_k^2 (row k), diagonal
    -2 a_k (a_{k+1} + a_{k-1}) - 2 w_k."""
    a = np.asarray(getattr(state, "a", state), dtype=float)
    off = 1.0 - a * a
    diag = -2.0 * a * _neighbours(a) - 2.0 * inst.weights()
    return TridiagMatrix(off[1:], diag, off[:-1])


def d_matrix(s):
    """The positive-definite matrix D of the s-coordinate Hessian."""
    s = np.asarray(s, dtype=float)
    r = np.sqrt(_padded(s))
    diag = (r[:-2] + r[2:]) / s ** 1.5
    off = -1.0 / (r[1:-2] * r[2:-1])
    return TridiagMatrix(off, diag, off)


def hessian_s(inst, s_state):
    """Hessian of H~: diag(w_j / (1 - s_j)^2) + D / 4."""
    s = np.asarray(getattr(s_state, "s", s_state), dtype=float)
    _require_interior(s, "s_j")
    d = d_matrix(s)
    return TridiagMatrix(0.25 * d.sub, inst.weights() / (1.0 - s) ** 2 + 0.25 * d.diag, 0.25 * d.sup)


def tridiag_solve(m, rhs):
    """Solve m x = rhs by Thomas elimination (no pivoting).

    Raises
    ------
    SingularPivot
        If a pivot falls below 1e-300 in magnitude.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (m.size,):
        raise ValueError("rhs length does not match the matrix")
    x, bad = kernels.thomas(m.sub, m.diag, m.sup, rhs, PIVOT_GUARD)
    if bad >= 0:
        raise SingularPivot(f"pivot {bad} below guard", int(bad))
    return x


def cholesky_pivots(m):
    """Pivots of the LDL^T factorization of a symmetric tridiagonal matrix."""
    d = m.diag
    piv = np.empty(m.size)
    piv[0] = d[0]
    for i in range(1, m.size):
        piv[i] = d[i] - m.sub[i - 1] ** 2 / piv[i - 1] if piv[i - 1] != 0 else -np.inf
    return piv


def auto_start(inst):
    """Continuum profile sqrt(1 - (k + eps)/t), floored and capped inside (0, 1)."""
    w = inst.weights()
    a = np.sqrt(np.maximum(1e-6, 1.0 - w))
    return np.minimum(a, 1.0 - 1.0 / (2.0 * inst.n))


@dataclass
class SolveInfo:
    iterations: int = 0
    newton_steps: int = 0
    descent_steps: int = 0
    residual: float = np.inf
    history: list = field(default_factory=list)


def _clamp(a):
    return np.clip(a, CLAMP_LO, 1.0 - CLAMP_HI)


def _newton_step(inst, a, fa, norm):
    """Backtracking Newton step on F; returns (a_new, F(a_new), norm) or None."""
    try:
        d = tridiag_solve(f_jacobian(inst, a), -fa)
    except SingularPivot:
        return None
    if not np.all(np.isfinite(d)):
        return None
    lam = 1.0
    while lam > 1e-10:
        trial = _clamp(a + lam * d)
        ft = f_map(inst, trial)
        nt = float(np.max(np.abs(ft)))
        if nt < (1.0 - 1e-4 * lam) * norm:
            return trial, ft, nt
        lam *= 0.5
    return None


def hessian_a(inst, a):
    """Hessian of H in a-coordinates (not definite in general)."""
    a = np.asarray(a, dtype=float)
    diag = 2.0 * inst.weights() * (1.0 + a * a) / (1.0 - a * a) ** 2
    off = -np.ones(a.size - 1)
    return TridiagMatrix(off, diag, off)


def _descent_step(inst, a):
    """Armijo step on H(a) along a modified Newton direction.

    The a-Hessian is shifted by mu I until its LDL^T pivots are positive,
    which makes the direction a descent direction; at the minimiser no
    shift is needed and the step is a plain Newton step.

    Returns
    -------
    a_new : ndarray
    local : bool
        True when the unshifted full step was accepted.
    """
    g = gradient(inst, a)
    h = hessian_a(inst, a)
    mu = 0.0
    while np.any(cholesky_pivots(h) <= 0):
        mu = max(2.0 * mu, 1e-3 * float(np.max(h.diag)))
        h = TridiagMatrix(h.sub, h.diag + mu, h.sup)
    p = -tridiag_solve(h, g)
    h0 = hamiltonian(inst, a)
    lam = 1.0
    while lam > 1e-14:
        trial = _clamp(a + lam * p)
        if hamiltonian(inst, trial) <= h0 + 1e-4 * float(np.dot(g, trial - a)):
            return trial, (mu == 0.0 and lam == 1.0)
        lam *= 0.5
    return a, False


def solve(inst, start="AUTO", tol=1e-12, max_iter=MAX_ITER, info=None):
    """Unique interior solution of the boundary-value problem.

    Damped Newton on F with a backtracking line search on ||F||_inf and
    iterates clamped into [1e-300, 1 - 1e-12]. When the line search stalls,
    modified Newton steps on H take over until an unshifted full step is
    accepted, then Newton on F resumes.

    Parameters
    ----------
    inst : DpiiInstance
    start : DpiiState, array or "AUTO"
    tol : float
        Target for ||F||_inf.
    info : SolveInfo, optional
        Filled with iteration counts and the residual history.

    Returns
    -------
    DpiiState

    Raises
    ------
    NoConvergence
        After ``max_iter`` iterations; carries the best iterate.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    if info is None:
        info = SolveInfo()
    if isinstance(start, str):
        if start != "AUTO":
            raise ValueError(f"unknown start {start!r}")
        a = auto_start(inst)
    else:
        a = np.asarray(getattr(start, "a", start), dtype=float)
        if a.shape != (inst.size,):
            raise DomainError(f"start has {a.size} entries, expected {inst.size}")
    a = _clamp(a)
    fa = f_map(inst, a)
    norm = float(np.max(np.abs(fa)))
    best = (norm, a)
    descending = False
    for it in range(max_iter):
        info.iterations = it
        info.residual = norm
        info.history.append(norm)
        if norm < tol:
            return DpiiState(a)
        step = None if descending else _newton_step(inst, a, fa, norm)
        if step is None:
            # stay on H until the local Newton basin is reached, so the two
            # merit functions cannot undo each other's progress
            a, descending = _descent_step(inst, a)
            descending = not descending
            fa = f_map(inst, a)
            norm = float(np.max(np.abs(fa)))
            info.descent_steps += 1
        else:
            a, fa, norm = step
            info.newton_steps += 1
        if norm < best[0]:
            best = (norm, a)
    info.iterations = max_iter
    info.residual = best[0]
    if best[0] < tol:
        return DpiiState(best[1])
    raise NoConvergence(f"no convergence after {max_iter} iterations, residual {best[0]:.3g}",
                        DpiiState.raw(best[1]), best[0])
