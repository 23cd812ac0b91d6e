import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dpii import Degenerate, DomainError, ScalingConfig, figure1_data, run_scaling, slope_fit
from dpii.scaling import FIGURE_COLUMNS, write_figure_csv


@given(c=st.floats(0.01, 100), p=st.floats(-2, 2))
def test_slope_fit_exact_power_law(c, p):
    ns = np.array([1000.0, 4000.0, 16000.0])
    assert slope_fit(list(zip(ns, c * ns**p))) == pytest.approx(p, abs=1e-9)


def test_slope_fit_errors():
    with pytest.raises(Degenerate):
        slope_fit([(1, 1.0), (2, 2.0)])
    with pytest.raises(Degenerate):
        slope_fit([(5, 1.0), (5, 2.0), (5, 3.0)])
    with pytest.raises(DomainError):
        slope_fit([(1, 1.0), (2, 0.0), (3, 1.0)])


def test_config():
    cfg = ScalingConfig(1.0)
    assert cfg.omega == pytest.approx(2 ** (-1 / 3))
    assert cfg.t_of(1000) == pytest.approx(1000 - 10 * 2 ** (-1 / 3))
    with pytest.raises(DomainError):
        ScalingConfig(0.0, n_list=(8000, 2000))
    with pytest.raises(DomainError):
        ScalingConfig(0.0, x_probe=(0.5,))
    with pytest.raises(DomainError):
        ScalingConfig(math.inf)


def test_small_n_rejected():
    with pytest.raises(DomainError):
        run_scaling(ScalingConfig(0.0, n_list=(500, 2000, 4000)))


def test_run_scaling_writes_csv(tmp_path):
    cfg = ScalingConfig(0.0, n_list=(1000, 2000, 4000), x_probe=(-1.0, -2.0))
    rep = run_scaling(cfg, out_dir=tmp_path, comments=["hello"])
    assert rep.n_done == [1000, 2000, 4000] and not rep.missing
    assert rep.slope < 0
    lines = open(rep.csv_paths[0]).read().splitlines()
    assert lines[0] == "# hello" and lines[1] == "x,k,scaled_a,nu,error"
    assert len(lines) == 4
    d = json.loads(rep.to_json())
    assert [e["n"] for e in d["entries"]] == [1000, 2000, 4000]
    assert "inferred" in d["note"]


def test_figure_data_hm(tmp_path):
    data = figure1_data(math.inf, (-10.0, 2.0), 121)
    assert set(data) == set(FIGURE_COLUMNS)
    right = data["x"] > 0
    assert np.all(np.isnan(data["bound_e"][right])) and np.all(np.isnan(data["sqrt_half"][right]))
    left = ~right
    assert np.all(data["u"][left] > np.fmax(data["bound_e"], data["bound_third"])[left])
    p = tmp_path / "f.csv"
    write_figure_csv(p, data, ["c"])
    assert open(p).read().splitlines()[1] == ",".join(FIGURE_COLUMNS)


def test_figure_range_must_avoid_pole():
    with pytest.raises(DomainError):
        figure1_data(0.5, (-5.0, 1.0))
    with pytest.raises(DomainError):
        figure1_data(0.5, (-1.0, -2.0))
