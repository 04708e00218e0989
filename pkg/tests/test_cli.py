import csv
import io
import json

import numpy as np
import pytest

from vbroadcast.choi import ChoiOperator
from vbroadcast.cli import main

from conftest import C_HAT


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def run_json(argv):
    code, text = run(argv)
    return code, json.loads(text)


@pytest.fixture
def cloner_file(tmp_path):
    path = tmp_path / "cloner.json"
    assert run(["export", "cloner", "--out", str(path)])[0] == 0
    return str(path)


def test_reproduce_summary():
    code, d = run_json(["reproduce-paper", "--seed", "7"])
    assert code == 0 and d["all_pass"]
    expected = {
        "min_trace_norm": 10 / 3,
        "sim_cost": 5 / 3,
        "diamond_to_cloner": 2 / 3,
        "baseline_cost": 2.0,
        "baseline_diamond": 1.0,
        "sample_ratio": 25 / 18,
    }
    for k, v in expected.items():
        assert abs(d[k] - v) <= 1e-6, k
    assert d["seconds"] < 300


def test_verify_cloner_file(cloner_file):
    code, d = run_json(["verify", "--choi", cloner_file, "--require", "tp,hp,cp"])
    assert code == 0 and d["cp"] and d["pass"]


def test_verify_broadcaster_full_report(tmp_path):
    path = tmp_path / "b.json"
    path.write_text(ChoiOperator(C_HAT).to_json())
    code, d = run_json(["verify", "--choi", str(path), "--require", "tp,hp,classic,broadcast,phase,flip,perm"])
    assert code == 0
    assert d["broadcast"]["pass"] and d["classic"] and all(d["symmetry"].values())
    assert not d["cp"]


def test_verify_failure_exit_code():
    code, d = run_json(["verify", "--choi", "broadcaster", "--require", "cp"])
    assert code == 2 and not d["pass"]


def test_verify_unknown_requirement():
    assert run(["verify", "--choi", "broadcaster", "--require", "nonsense"])[0] == 1


def test_distance_self(cloner_file):
    code, d = run_json(["distance", "--a", cloner_file, "--b", cloner_file])
    assert code == 0
    assert d == {"value": 0.0, "lower_cert": 0.0, "upper_cert": 0.0, "certified": True}


def test_distance_broadcaster_cloner():
    code, d = run_json(["distance", "--a", "broadcaster", "--b", "cloner", "--starts", "4"])
    assert code == 0 and abs(d["value"] - 2 / 3) <= 1e-6 and d["certified"]


@pytest.mark.parametrize("text", ["{", '{"re": 1}', '{"dim_in": 2, "dims_out": [2, 2], "re": [[1]], "im": [[0]]}'])
def test_malformed_choi(tmp_path, capsys, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    code, _ = run(["verify", "--choi", str(path)])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_missing_file(capsys):
    assert run(["decompose", "--choi", "/nonexistent/x.json"])[0] == 1


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["minimize", "--bogus"])
    assert exc.value.code == 1


def test_unknown_command():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_derive_family_deterministic():
    a = run_json(["derive-family", "--seed", "5"])
    b = run_json(["derive-family", "--seed", "5"])
    assert a == b and a[0] == 0
    assert a[1]["residual"] <= 1e-12 and a[1]["hermitian_params"]


def test_derive_family_given_choi():
    code, d = run_json(["derive-family", "--choi", "broadcaster"])
    p = {k: complex(*v) for k, v in d["params"].items()}
    assert np.isclose(p["c4"], 5 / 12) and np.isclose(p["c5"], -1 / 12)


def test_minimize_schema():
    code, d = run_json(["minimize", "--starts", "4", "--seed", "1"])
    assert code == 0
    assert set(d) == {"value", "argmin", "grid_certificate", "restarts_used"}
    assert abs(d["value"] - 10 / 3) <= 1e-7 and d["restarts_used"] == 4


def test_decompose_writes_parts(tmp_path):
    plus, minus = tmp_path / "p.json", tmp_path / "m.json"
    code, d = run_json(["decompose", "--choi", "broadcaster", "--out-plus", str(plus), "--out-minus", str(minus)])
    assert code == 0 and np.isclose(d["a"], 4 / 3) and np.isclose(d["b"], 1 / 3)
    assert d["base_norm"]["certified"]
    cm = ChoiOperator.from_json(minus.read_text())
    assert np.isclose(np.trace(cm.matrix).real, 2)


def test_simulate_shards_agree():
    a = run_json(["simulate", "--shots", "3000", "--seed", "4"])[1]
    b = run_json(["simulate", "--shots", "3000", "--seed", "4", "--shards", "5"])[1]
    assert a == b


def test_simulate_direct():
    code, d = run_json(["simulate", "--direct", "--r", "0.5", "--shots", "4000"])
    assert code == 0 and abs(d["estimate"] - 0.5) < 0.1


def test_sample_report():
    code, d = run_json(["sample-report"])
    assert code == 0 and abs(d["ratio"] - 25 / 18) <= 1e-9 and not d["sample_efficient"]
    code, d = run_json(["sample-report", "--choi", "canonical"])
    assert abs(d["ratio"] - 2) <= 1e-9


def test_sample_report_failure_rate_csv():
    code, text = run(["--format", "csv", "sample-report", "--repetitions", "100"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 100 and set(rows[0]) == {"repetition", "error"}


def test_sample_report_failure_rate_json():
    code, d = run_json(["sample-report", "--repetitions", "100"])
    fr = d["failure_rate"]
    assert fr["shots"] == 8200 and fr["rate"] <= fr["bound"]


def test_baseline():
    code, d = run_json(["baseline"])
    assert code == 0
    assert abs(d["cost"]["upper"] - 2) <= 1e-9
    assert abs(d["diamond_to_universal_cloner"]["value"] - 1) <= 1e-6
    assert d["universal_fidelity_spread"] <= 1e-10


def test_export_stdout():
    code, d = run_json(["export", "broadcaster"])
    assert np.allclose(ChoiOperator.from_dict(d).matrix, C_HAT)


def test_csv_flattens_nested():
    code, text = run(["--format", "csv", "distance", "--a", "cloner", "--b", "cloner", "--starts", "1"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows[0]["certified"] == "True"


def test_config_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"minimize": {"starts": 2, "grid_points": 11}}))
    code, d = run_json(["--config", str(cfg), "minimize"])
    assert d["restarts_used"] == 2 and d["grid_certificate"]["points_per_axis"] == 11


def test_config_env_var(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"minimize": {"starts": 3, "grid_points": 11}}))
    monkeypatch.setenv("VBROADCAST_CONFIG", str(cfg))
    code, d = run_json(["minimize"])
    assert d["restarts_used"] == 3


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert run(["--config", str(cfg), "sample-report"])[0] == 1
