import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpii import (ApproxConfig, KantorovichCertificate, NotDominant, TridiagMatrix,
                  build_a0, f_jacobian, gamma_rows, kantorovich_certificate, lipschitz_M,
                  solve, varah_bound)
from dpii.approx import approximation_error, nu_for
from dpii.certify import lipschitz_rows, newton_step_norm, t_star_of
from dpii.errors import BallEscapes


@given(n=st.integers(1, 25), seed=st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_varah_bounds_inverse_norm(n, seed):
    rng = np.random.default_rng(seed)
    m = TridiagMatrix(rng.uniform(-1, 1, n - 1), rng.uniform(2.05, 3, n) * rng.choice([-1, 1], n),
                      rng.uniform(-1, 1, n - 1))
    inv_norm = np.max(np.sum(np.abs(np.linalg.inv(m.to_dense())), axis=1))
    assert inv_norm <= varah_bound(m) * (1 + 1e-12)


def test_varah_not_dominant():
    m = TridiagMatrix(np.array([1.0]), np.array([3.0, 0.5]), np.array([1.0]))
    with pytest.raises(NotDominant) as exc:
        varah_bound(m)
    assert exc.value.row == 1
    assert exc.value.margin == pytest.approx(-0.5)


def test_t_star_formula():
    assert t_star_of(0.1, 2.0) == pytest.approx(0.2 / (1 + math.sqrt(0.6)))
    assert t_star_of(0.25, 2.0) is None
    # t* lies between beta and 2 beta
    for beta, m in [(1e-3, 10.0), (0.2, 2.4)]:
        assert beta <= t_star_of(beta, m) <= 2 * beta


@pytest.fixture(scope="module")
def case(family_keys):
    cfg = ApproxConfig(0.5, 1.0, 2000)
    inst = cfg.instance()
    a0 = build_a0(cfg, nu_for(cfg))
    return inst, a0


def test_lipschitz_rows_bound_sampled_differences(case):
    inst, a0 = case
    a = a0.a
    r = 1e-3
    rows = lipschitz_rows(inst, a, r)
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = a + rng.uniform(-r, r, a.size)
        y = a + rng.uniform(-r, r, a.size)
        jx, jy = f_jacobian(inst, x), f_jacobian(inst, y)
        row_l1 = (np.abs(jx.diag - jy.diag)
                  + np.concatenate(([0.0], np.abs(jx.sub - jy.sub)))
                  + np.concatenate((np.abs(jx.sup - jy.sup), [0.0]))) / a
        assert np.all(row_l1 <= rows * np.max(np.abs(x - y)) * (1 + 1e-12))


def test_lipschitz_ball_escape(case):
    inst, a0 = case
    with pytest.raises(BallEscapes):
        lipschitz_rows(inst, a0.a, 1.0)


def test_gamma_rows_lower_bound_true_margins(case):
    inst, a0 = case
    true = f_jacobian(inst, a0).row_margins()
    g = gamma_rows(inst, a0)
    assert np.all(g <= true + 1e-12)
    np.testing.assert_allclose(gamma_rows(inst, a0, scaled=True), g / a0.a)


def test_certificate_invariants_and_containment(case):
    inst, a0 = case
    cert = kantorovich_certificate(inst, a0, n=inst.n)
    assert cert.beta <= cert.beta_split
    assert cert.beta == pytest.approx(newton_step_norm(inst, a0))
    assert cert.pass_ == (cert.product < 0.5)
    assert cert.M == pytest.approx(lipschitz_M(inst, a0, 2 * cert.beta))
    assert cert.pass_
    dist = approximation_error(solve(inst, a0), a0)
    assert dist <= cert.t_star
    d = json.loads(cert.to_json(config_hash="abc"))
    assert d["pass"] is True and "pass_" not in d
    assert d["n"] == inst.n and d["config_hash"] == "abc"


def test_certificate_export_nonfinite(case):
    inst, a0 = case
    cert = kantorovich_certificate(inst, a0)
    d = cert.to_dict()
    if not math.isfinite(cert.M_split):
        assert d["M_split"] is None


def test_certificate_rejects_inconsistent_fields():
    base = dict(beta=0.1, M=1.0, product=0.1, t_star=0.1, pass_=True, gamma_min=1.0,
                gammaD_min=1.0, f_norm=0.1, beta_split=0.2)
    KantorovichCertificate(**base)
    for bad in (dict(pass_=False), dict(t_star=None), dict(beta_split=0.05)):
        with pytest.raises(ValueError):
            KantorovichCertificate(**dict(base, **bad))
