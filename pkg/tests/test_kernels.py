"""Compiled and pure-Python kernels agree; both match independent solvers."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from dpii import _pykernels, kernels

try:
    from dpii import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = [_pykernels] + ([_ckernels] if _ckernels is not None else [])
needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def _dominant_system(rng, n):
    sub = rng.uniform(-1, 1, n - 1)
    sup = rng.uniform(-1, 1, n - 1)
    diag = rng.uniform(2.1, 4.0, n) * rng.choice([-1, 1], n)
    return sub, diag, sup, rng.normal(size=n)


def _dense(sub, diag, sup):
    return np.diag(diag) + np.diag(sub, -1) + np.diag(sup, 1)


def test_backend_flag_is_known():
    assert kernels.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
@given(n=st.integers(1, 40), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_thomas_matches_dense_solve(mod, n, seed):
    rng = np.random.default_rng(seed)
    sub, diag, sup, rhs = _dominant_system(rng, n)
    x, bad = mod.thomas(sub, diag, sup, rhs, 1e-300)
    assert bad == -1
    np.testing.assert_allclose(x, np.linalg.solve(_dense(sub, diag, sup), rhs), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_thomas_reports_zero_pivot(mod):
    sub = np.array([1.0])
    diag = np.array([1.0, 1.0])
    sup = np.array([1.0])
    _, bad = mod.thomas(sub, diag, sup, np.ones(2), 1e-300)
    assert bad == 1


@needs_ext
def test_thomas_backends_identical():
    rng = np.random.default_rng(3)
    sub, diag, sup, rhs = _dominant_system(rng, 500)
    xp, _ = _pykernels.thomas(sub, diag, sup, rhs, 1e-300)
    xc, _ = _ckernels.thomas(sub, diag, sup, rhs, 1e-300)
    np.testing.assert_allclose(xc, xp, rtol=1e-14, atol=0)


def _shot(mod, x_stop=1.0, y0=0.1, yp0=0.0):
    return mod.rk_integrate(2.0, 0.0, -2.0, y0, yp0, x_stop, 1e-11, 1e-13, 1e-3,
                            10.0, 1e-3, False, False, 1_000_000)


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_rk_matches_scipy(mod):
    xs, ys, yps, status = _shot(mod)
    assert status == kernels.REACHED
    ref = solve_ivp(lambda x, y: [y[1], 2 * x * y[0] + 2 * y[0] ** 3], (-2.0, 1.0), [0.1, 0.0],
                    method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)
    np.testing.assert_allclose(ys, ref.sol(xs)[0], rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(yps, ref.sol(xs)[1], rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_rk_detects_pole(mod):
    # u'' = 2 u^3 (p = 0) with u = 1/(1 - x): pole at x = 1
    xs, ys, _, status = mod.rk_integrate(0.0, 0.0, 0.0, 1.0, 1.0, 5.0, 1e-11, 1e-13, 1e-3,
                                         10.0, 1e-3, False, False, 1_000_000)
    assert status == kernels.POLE
    assert xs[-1] < 1.0
    np.testing.assert_allclose(ys, 1.0 / (1.0 - xs), rtol=1e-7)


@needs_ext
def test_rk_backends_agree():
    a = _shot(_pykernels, 1.5)
    b = _shot(_ckernels, 1.5)
    assert a[3] == b[3]
    assert len(a[0]) == len(b[0])
    np.testing.assert_allclose(b[1], a[1], rtol=1e-12, atol=1e-14)
