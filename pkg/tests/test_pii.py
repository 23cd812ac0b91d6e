import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sp
from scipy.integrate import solve_ivp

from dpii import (BoundaryPoint, DomainError, GridCoverage, PiiForm, PiiTrajectory,
                  airy_ai, asymptotic_init, convert, identity_residual, integrate,
                  pii_rhs, region_classify)
from dpii.asymptotics import left_series, tail_integral
from dpii.pii import (CBRT2, REGION_SIGN, read_trajectory_csv, residue_estimate,
                      write_trajectory_csv, yprime_bound_margin)


@pytest.mark.parametrize("x", [0.0, 0.5, 3.0, 6.999, 7.0, 7.5, 12.0, 25.0])
def test_airy_matches_scipy(x):
    ref = sp.airy(x)[0]
    assert airy_ai(x) == pytest.approx(ref, rel=1e-11)


def test_airy_rejects_negative():
    with pytest.raises(DomainError):
        airy_ai(-1.0)


def test_form_validation():
    with pytest.raises(DomainError):
        PiiForm("ZZ")
    with pytest.raises(DomainError):
        PiiForm("NU")
    with pytest.raises(DomainError):
        PiiForm("U", 1.0)
    assert PiiForm.nu(0.5).shift == 0.5
    assert PiiForm.yy().p == 1.0 and PiiForm.u().p == 2.0


def test_rhs_forms():
    assert pii_rhs(PiiForm.yy(), 2.0, 0.5) == pytest.approx(2.0 * 0.5 + 2 * 0.125)
    assert pii_rhs(PiiForm.u(), 2.0, 0.5) == pytest.approx(2 * 2.0 * 0.5 + 2 * 0.125)
    assert pii_rhs(PiiForm.nu(1.0), 2.0, 0.5) == pytest.approx(2 * 3.0 * 0.5 + 2 * 0.125)


def test_left_series_solves_ode():
    # finite-difference check of u'' = 2 x u + 2 u^3 on the expansion
    x, h = -10.0, 1e-3
    u = [left_series(x + d)[0] for d in (-h, 0.0, h)]
    upp = (u[0] - 2 * u[1] + u[2]) / h**2
    assert upp == pytest.approx(2 * x * u[1] + 2 * u[1] ** 3, abs=1e-5)


def test_tail_integral_matches_quadrature():
    from scipy.integrate import quad
    lo = -60.0
    part, _ = quad(lambda s: left_series(s)[0] ** 2 + s, lo, -12.0, limit=200)
    assert tail_integral(-12.0) - tail_integral(lo) == pytest.approx(part, rel=1e-6)


def test_asymptotic_init_guard():
    with pytest.raises(DomainError):
        asymptotic_init(PiiForm.u(), -3.0, 0.0)
    u, up = asymptotic_init(PiiForm.u(), -12.0, 0.0)
    assert u == pytest.approx(math.sqrt(12.0), rel=1e-3)


def test_integrate_matches_scipy():
    form = PiiForm.u()
    traj = integrate(form, (-2.0, 0.1, 0.0), 1.0, 1e-11)
    ref = solve_ivp(lambda x, y: [y[1], 2 * x * y[0] + 2 * y[0] ** 3], (-2.0, 1.0), [0.1, 0.0],
                    method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)
    xs = np.linspace(-2.0, 1.0, 50)
    np.testing.assert_allclose(traj.evaluate(xs)[0], ref.sol(xs)[0], rtol=1e-8)


def test_pole_residue_and_position():
    # u'' = 2 x u + 2 u^3 started well above the separatrix blows up
    form = PiiForm.u()
    traj = integrate(form, (-1.0, 2.0, 1.0), 5.0, 1e-11)
    assert traj.pole is not None and traj.pole > traj.grid[-1]
    assert residue_estimate(traj) == pytest.approx(-1.0, abs=2e-3)


def test_evaluate_outside_grid(hm):
    with pytest.raises(GridCoverage):
        hm.evaluate(hm.grid[-1] + 1.0)


def test_convert_roundtrip(hm):
    yy = convert(hm, PiiForm.yy())
    x = np.linspace(-8.0, 1.0, 17)
    np.testing.assert_allclose(yy.evaluate(CBRT2 * x)[0], hm.evaluate(x)[0] / CBRT2, rtol=1e-12)
    back = convert(yy, PiiForm.u())
    np.testing.assert_allclose(back.value, hm.value, rtol=1e-14)


def test_identity_residual_on_hm(hm):
    xs = np.linspace(-11.0, 1.5, 11)
    assert np.max(np.abs(identity_residual(hm, xs))) < 1e-5


def test_identity_residual_rejects_yy(hm):
    with pytest.raises(DomainError):
        identity_residual(convert(hm, PiiForm.yy()), 0.0)


@given(x=st.floats(-20, 20), u=st.floats(-5, 5))
def test_region_sign_matches_rhs(x, u):
    try:
        r = region_classify(x, u)
    except BoundaryPoint:
        assert abs(u) <= 1e-12 or abs(x + u * u) <= 1e-12
        return
    assert np.sign(pii_rhs(PiiForm.u(), x, u)) == REGION_SIGN[r]


def test_region_examples():
    assert region_classify(-4.0, 1.0) == "I"
    assert region_classify(0.0, 1.0) == "II"
    assert region_classify(-1.0, -2.0) == "III"
    assert region_classify(-4.0, -1.0) == "IV"


def test_yprime_bound_on_hm(hm):
    assert yprime_bound_margin(hm) > 0


def test_trajectory_validation():
    with pytest.raises(DomainError):
        PiiTrajectory(PiiForm.u(), np.array([0.0, 0.0]), np.zeros(2), np.zeros(2))
    with pytest.raises(DomainError):
        PiiTrajectory(PiiForm.u(), np.array([0.0, 1.0]), np.zeros(2), np.zeros(2), pole=0.5)


def test_csv_roundtrip(tmp_path, hm):
    nu = PiiTrajectory(PiiForm.nu(0.25), hm.grid[:50], hm.value[:50], hm.deriv[:50], pole=None)
    for traj in (hm, nu):
        p = tmp_path / "t.csv"
        write_trajectory_csv(p, traj, ["note"])
        back = read_trajectory_csv(p)
        assert back.form == traj.form
        np.testing.assert_array_equal(back.grid, traj.grid)
        np.testing.assert_array_equal(back.value, traj.value)
