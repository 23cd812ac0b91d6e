import math

import numpy as np
import pytest

from dpii import (DomainError, NoPole, NuSeries, PiiForm, PoleMap, TronqueeKey, b_of_pole,
                  f_ode_residual, identity_residual, lower_bound_margin,
                  monotonicity_check, nu_omega, nu_series, pole_of)
from dpii.pii import residue_estimate
from dpii.tronquee import (X_ANCHOR, delta_link, e_function, f_from_nu, f_series,
                           fit_free_param, hm_key, lower_bounds_u, lower_bounds_yy,
                           separatrix)


def test_separatrix_bracket_is_tight():
    lo, hi = separatrix()
    assert lo < hi
    assert hi - lo < 1e-9 * math.sqrt(-X_ANCHOR)


def test_pole_of_decreases_with_amplitude():
    lo, hi = separatrix()
    deltas = hi + np.geomspace(1e-8, 1e-4, 6)
    poles = [pole_of(d) for d in deltas]
    assert np.all(np.diff(poles) < 0)


def test_pole_of_requires_positive_amplitude():
    with pytest.raises(DomainError):
        pole_of(0.0)
    with pytest.raises(DomainError):
        pole_of(1.0)


def test_no_pole_before_stop():
    lo, hi = separatrix()
    with pytest.raises(NoPole):
        pole_of(hi + 1e-9, x_stop_max=0.0)


def test_b_of_pole_roundtrip(family_keys):
    for w, k in family_keys.items():
        assert k.omega == pytest.approx(w, abs=1e-8)
        assert pole_of(k.delta, k.x_left) == pytest.approx(w, abs=1e-8)
        assert k.delta == pytest.approx(k.b * delta_link(k.x_left), rel=1e-12)


def test_b_decreases_with_omega(family_keys):
    ws = sorted(family_keys)
    bs = [family_keys[w].b for w in ws]
    assert np.all(np.diff(bs) < 0)


def test_far_pole_moves_anchor():
    k = b_of_pole(-4.0)
    assert k.x_left < X_ANCHOR
    assert k.omega == pytest.approx(-4.0, abs=1e-8)


def test_cache_warm_start(family_keys):
    cache = PoleMap().with_keys(*family_keys.values())
    trace = []
    k = b_of_pole(1.0, cache=cache, trace=trace)
    cold = []
    b_of_pole(1.0, trace=cold)
    assert k.omega == pytest.approx(1.0, abs=1e-8)
    assert len(trace) < len(cold)


def test_polemap_csv_roundtrip(tmp_path, family_keys):
    pm = PoleMap().with_keys(*family_keys.values())
    p = tmp_path / "pm.csv"
    pm.write_csv(p, ["x"])
    assert PoleMap.read_csv(p) == pm
    lo, hi = pm.bracket(1.0, X_ANCHOR)
    assert lo == family_keys[2.0].delta and hi == family_keys[0.5].delta


def test_family_residue_and_identity(family):
    for w, tr in family.items():
        assert tr.pole == pytest.approx(w, abs=1e-8)
        assert residue_estimate(tr) == pytest.approx(-1.0, abs=1e-3)
        assert abs(identity_residual(tr, w - 0.5)) < 1e-5


def test_family_monotone(family_keys):
    k_hi, k_lo = family_keys[-1.0], family_keys[2.0]
    assert monotonicity_check(k_hi, k_lo, (-12.0, -1.5, 200)) > 0
    assert monotonicity_check(k_lo, hm_key(), (-12.0, 1.5, 200)) > 0


def test_monotonicity_argument_order(family_keys):
    with pytest.raises(DomainError):
        monotonicity_check(family_keys[2.0], family_keys[-1.0], (-5, -2, 10))


def test_lower_bounds(family, hm):
    for tr in list(family.values()) + [hm]:
        m = lower_bound_margin(tr)
        assert m.min_margin > 0
        assert m.alt_min_margin >= m.min_margin


def test_bound_helpers():
    x = np.array([-3.0, -1.0, -0.1])
    assert np.all(e_function(x) <= 1.0)
    b1, b2 = lower_bounds_u(x)
    assert np.all(b1 <= np.sqrt(-x) + 1e-15)
    y1, y2 = lower_bounds_yy(x * 2 ** (1 / 3))
    np.testing.assert_allclose(y2 * 2 ** (1 / 3), b2, rtol=1e-14)


@pytest.fixture(scope="module")
def nu(family_keys):
    return nu_omega(0.5, (-12.0, -0.05), key=family_keys[0.5])


def test_nu_pole_at_origin(nu):
    assert nu.form == PiiForm.nu(0.5)
    assert abs(nu.meta["pole_offset"]) < 1e-8
    # x nu(x) -> -1 at the pole
    assert nu.evaluate(-0.05)[0] * -0.05 == pytest.approx(-1.0, abs=2e-3)


def test_nu_grid_must_end_left_of_pole(family_keys):
    with pytest.raises(DomainError):
        nu_omega(0.5, (-3.0, 0.1), key=family_keys[0.5])


def test_series_satisfies_f_ode():
    s = NuSeries.build(0.7, free_param=0.3, order=14)
    coeffs = s.full()
    for x in (-0.2, -0.1, -0.05):
        p = np.polynomial.Polynomial(coeffs)
        f, fp, fpp = 1 - p(x), -p.deriv(1)(x), -p.deriv(2)(x)
        assert abs(f_ode_residual(0.7, x, f, fp, fpp)) < 10 * abs(x) ** 14 + 1e-14


def test_series_matches_trajectory(nu):
    c4 = fit_free_param(nu)
    s = NuSeries.build(0.5, c4, 10)
    for x in (-0.2, -0.1):
        assert nu_series(s, x) == pytest.approx(nu.evaluate(x)[0], rel=1e-7)
        assert f_series(s, x) == pytest.approx(f_from_nu(nu, x)[0], abs=1e-8)


def test_series_radius_guard():
    s = NuSeries.build(0.5)
    with pytest.raises(DomainError):
        nu_series(s, 0.3)
    with pytest.raises(DomainError):
        f_series(s, 0.0)


def test_f_ode_on_trajectory(nu):
    xs = np.linspace(-3.0, -0.1, 30)
    f, fp, fpp = f_from_nu(nu, xs)
    assert np.max(np.abs(f_ode_residual(0.5, xs, f, fp, fpp))) < 1e-6


def test_key_validation():
    with pytest.raises(DomainError):
        TronqueeKey(-1.0, 0.0, 0.0, X_ANCHOR)
