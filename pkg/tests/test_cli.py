import io
import json
import os
import subprocess
import sys

import pytest

from dpii.cli import RunConfig, load_config, run_command, validate
from dpii.errors import ParseError


def run(args):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(args, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_solve_summary(tmp_path):
    code, out, _ = run(["solve", "--n", "2", "--t", "1", "--eps", "1", "--out", str(tmp_path)])
    assert code == 0
    assert "a_0 = 0.618034" in out
    assert out.count("\n") == 1
    csv = (tmp_path / "solution.csv").read_text().splitlines()
    assert csv[0].startswith("# config_hash=")
    inst = json.loads((tmp_path / "instance.json").read_text())
    assert inst["n"] == 2 and "config_hash" in inst


def test_unknown_flag_is_usage_error():
    code, _, err = run(["solve", "--n", "2", "--bogus", "1"])
    assert code == 1
    assert "usage" in err


def test_missing_command_and_unknown_command():
    assert run([])[0] == 1
    assert run(["frobnicate"])[0] == 1


def test_missing_required_key():
    code, _, err = run(["solve", "--n", "2"])
    assert code == 1
    assert "'t'" in err


def test_config_defaults(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"command": "hm"}))
    cfg = load_config(p)
    assert cfg.parameters["tol"] == 1e-10
    assert cfg.parameters["x_left"] == -12.0
    assert cfg.parameters["delta_split"] == 1.0


def test_config_unknown_key(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"command": "hm", "colour": "red"}))
    with pytest.raises(ParseError) as exc:
        load_config(p)
    assert exc.value.key == "colour"


def test_config_negative_tol_names_key(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"command": "hm", "tol": -1e-3}))
    with pytest.raises(ParseError) as exc:
        load_config(p)
    assert exc.value.key == "tol"
    code, _, err = run(["hm", "--config", str(p)])
    assert code == 1 and "tol" in err


def test_config_malformed_reports_line(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n  "command": "hm",\n  "tol": ,\n}\n')
    with pytest.raises(ParseError) as exc:
        load_config(p)
    assert exc.value.line == 3


def test_serialize_roundtrip(tmp_path):
    cfg = validate({"command": "scaling", "sigma": 1, "n_list": "2000,4000,8000"})
    assert cfg.parameters["n_list"] == [2000, 4000, 8000]
    p = tmp_path / "c.json"
    p.write_text(cfg.serialize())
    back = load_config(p)
    assert back == cfg
    assert back.config_hash() == cfg.config_hash()
    assert validate(dict(cfg.to_dict(), sigma=2.0)).config_hash() != cfg.config_hash()


def test_flags_override_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"command": "solve", "n": 2, "t": 2.0, "eps": 1.0,
                             "out_dir": str(tmp_path / "o")}))
    code, out, _ = run(["solve", "--config", str(p), "--t", "1"])
    assert code == 0 and "a_0 = 0.618034" in out
    code, out, _ = run(["solve", "--config", str(p)])
    assert code == 0 and "a_0 = 0.780776" in out


def test_config_command_mismatch(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"command": "hm"}))
    assert run(["solve", "--config", str(p)])[0] == 1


def test_outputs_deterministic(tmp_path):
    args = ["solve", "--n", "40", "--t", "30", "--eps", "1"]
    run(args + ["--out", str(tmp_path / "a")])
    run(args + ["--out", str(tmp_path / "b")])
    for name in ("solution.csv", "instance.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_no_temp_files_left(tmp_path):
    run(["solve", "--n", "5", "--t", "4", "--eps", "1", "--out", str(tmp_path)])
    assert sorted(os.listdir(tmp_path)) == ["instance.json", "solution.csv"]


def test_certify_pass_and_json(tmp_path):
    code, out, _ = run(["certify", "--n", "2000", "--omega", "0.5", "--out", str(tmp_path)])
    assert code == 0 and "pass" in out
    d = json.loads((tmp_path / "certificate.json").read_text())
    assert d["pass"] is True and d["contained"] is True
    assert {"beta", "M", "product", "t_star", "gamma_min", "gammaD_min", "f_norm"} <= set(d)


def test_certify_failure_exit_3(tmp_path):
    code, out, _ = run(["certify", "--n", "20", "--omega", "3", "--out", str(tmp_path)])
    assert code == 3 and "FAIL" in out
    d = json.loads((tmp_path / "certificate.json").read_text())
    assert d["pass"] is False and d["t_star"] is None


def test_numerical_failure_exit_2(tmp_path):
    # a pole far beyond the shooting range cannot be bracketed
    code, _, err = run(["polemap", "--omegas", "60", "--out", str(tmp_path)])
    assert code == 2 and "numerical failure" in err


def test_pii_and_figure(tmp_path):
    code, out, _ = run(["pii", "--b", "1", "--x-stop", "3", "--out", str(tmp_path)])
    assert code == 0 and "pole at" in out
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0].startswith("# config_hash=") and "x,u,uprime" in lines
    code, out, _ = run(["figure1", "--sigma", "1", "--num", "50", "--out", str(tmp_path)])
    assert code == 0 and "min margin" in out


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "dpii", "solve", "--n", "2", "--t", "2",
                          "--eps", "1", "--out", str(tmp_path)],
                         capture_output=True, text=True, env=dict(os.environ, DPII_LOG="debug"))
    assert res.returncode == 0
    assert "0.780776" in res.stdout


def test_runconfig_dict():
    cfg = RunConfig("hm", {"tol": 1e-10}, "out", 3)
    assert cfg.to_dict() == {"command": "hm", "out_dir": "out", "seed": 3, "tol": 1e-10}
