import csv
import json
from pathlib import Path

from pergrowth.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_forge_writes_twelve_rows(tmp_path, capsys):
    code, out, _ = run(["forge", "--config", str(CONFIGS / "forge_n3.json"), "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "forge_orbits.csv").open()))
    assert len(rows) == 12
    census = list(csv.DictReader((tmp_path / "census.csv").open()))
    assert len(census) == 12
    summary = json.loads(out)
    assert summary["summary"]["census"]["hyperbolic"] == 6
    assert summary["summary"]["max_trace_error"] <= 1e-12


def test_missing_config_exits_2(tmp_path, capsys):
    code, _, err = run(["forge", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)], capsys)
    assert code == 2
    rep = json.loads(err)
    assert rep["error"]["exit_code"] == 2
    assert json.loads((tmp_path / "error.json").read_text()) == rep


def test_config_required(tmp_path, capsys):
    code, _, _ = run(["kam", "--out", str(tmp_path)], capsys)
    assert code == 2


def test_bad_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run(["census", "--config", str(bad), "--out", str(tmp_path)], capsys)
    assert code == 2


def test_invalid_field_exits_2(tmp_path, capsys):
    cfg = tmp_path / "f.json"
    cfg.write_text(json.dumps({"p": 1, "N": 3, "gamma": 0, "t": "1e-3"}))
    code, _, err = run(["forge", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 2
    assert json.loads(err)["error"]["type"] == "ValidationError"


def test_certify_golden(tmp_path, capsys):
    code, out, _ = run(["certify", "--theta", "golden", "--qmax", "10000", "--out", str(tmp_path)], capsys)
    assert code == 0
    s = json.loads(out)["summary"]
    assert abs(s["c_tail"] - 0.447) <= 1e-3
    assert s["violations"] == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert float(cert["qmax"]) == 10000


def test_certify_rational_exits_2(tmp_path, capsys):
    code, _, err = run(["certify", "--theta", "0.25", "--out", str(tmp_path)], capsys)
    assert code == 2
    assert json.loads(err)["error"]["type"] == "RationalDetected"


def test_certify_bad_theta_exits_2(tmp_path, capsys):
    code, _, _ = run(["certify", "--theta", "pi", "--out", str(tmp_path)], capsys)
    assert code == 2


def test_numeric_failure_exits_3(tmp_path, capsys):
    cfg = tmp_path / "k.json"
    cfg.write_text(json.dumps({"map": "standard", "theta": "golden", "shear_amplitude": 10.0,
                               "guess": 0.106}))
    code, _, err = run(["kam", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 3
    assert json.loads(err)["error"]["exit_code"] == 3


def test_kam_history_csv(tmp_path, capsys):
    code, _, _ = run(["kam", "--config", str(CONFIGS / "kam_golden.json"), "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = list(csv.reader((tmp_path / "kam_history.csv").open()))
    assert rows[0] == ["iteration", "residual"]
    assert float(rows[-1][1]) <= 1e-10


def test_census_config(tmp_path, capsys):
    code, out, _ = run(["census", "--config", str(CONFIGS / "census_twist.json"), "--out", str(tmp_path)],
                       capsys)
    assert code == 0
    s = json.loads(out)["summary"]
    assert s["degenerate_families"] >= 1
    assert s["hyperbolic"] == 0 and s["elliptic"] == 0


def test_seed_is_recorded_and_checked(tmp_path, capsys):
    args = ["forge", "--config", str(CONFIGS / "forge_n3.json"), "--out", str(tmp_path), "--seed", "7"]
    code, out, _ = run(args, capsys)
    assert code == 0 and json.loads(out)["summary"]["seed"] == 7
    code, _, _ = run(args[:-1] + [str(1 << 64)], capsys)
    assert code == 2


def test_interval_pipeline(tmp_path, capsys):
    cfg = tmp_path / "i.json"
    cfg.write_text(json.dumps({"delta": "0.2", "kmax": 6, "plateaus": [{"k": 1, "gamma": 4, "eps": "1e-4"}]}))
    code, out, _ = run(["interval", "--config", str(cfg), "--out", str(tmp_path)], capsys)
    assert code == 0
    s = json.loads(out)["summary"]
    assert s["plateaus"]["1"]["hyperbolic"] >= 4
    assert max(s["plateau_identity"].values()) <= 1e-9


def test_unknown_subcommand_exits_2(capsys):
    assert main(["frobnicate"]) == 2
