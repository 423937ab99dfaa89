import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sconv.cli import main, parse_range, UsageError


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_range():
    assert parse_range("1..4") == [1, 2, 3, 4]
    assert parse_range("0.5,1") == [0.5, 1.0]
    assert parse_range("1..2:0.5") == [1.0, 1.5, 2.0]
    with pytest.raises(UsageError):
        parse_range("3..1")


def test_bounds_erasure_renyi_sweep(capsys):
    code, out, _ = run(["bounds", "erasure-renyi", "--p", "0.25", "--dA", "2", "--rate", "0.5",
                        "--lambda", "1.5", "--n", "1..32"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 32
    assert list(rows[0]) == ["family", "n", "rate", "param_s", "param_gamma", "exponent", "raw", "bound"]
    bounds = [float(r["bound"]) for r in rows]
    assert all(b < a for a, b in zip(bounds, bounds[1:]))


def test_bounds_wolfowitz_degenerate_variance(capsys):
    code, out, _ = run(["bounds", "classical-wolfowitz", "--rate", "1.0", "--c1", "0.5", "--a1", "0",
                        "--n", "1..5"], capsys)
    assert code == 0
    for row in csv.DictReader(io.StringIO(out)):
        n = int(row["n"])
        assert float(row["raw"]) == pytest.approx(1 - math.exp(-n * 0.5 / 2))


def test_bounds_unknown_family_writes_nothing(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, _, err = run(["bounds", "bogus", "--rate", "1", "--out", str(target)], capsys)
    assert code == 2
    assert "unknown bound family" in err
    assert not target.exists()


def test_bounds_missing_params(capsys):
    code, _, err = run(["bounds", "erasure-renyi", "--rate", "1"], capsys)
    assert code == 2 and "--p" in err


def test_bounds_bits_round_trip(capsys):
    code, out, _ = run(["bounds", "erasure-hockeystick", "--p", "0.25", "--dA", "2", "--rate", "1",
                        "--bits", "--n", "4", "--format", "json"], capsys)
    assert code == 0
    blob = json.loads(out)
    assert blob["rate"] == pytest.approx(1.0)
    assert blob["params"]["log_gamma"] == pytest.approx(4 * (math.log(2) + 0.5 * math.log(2)) / 2)


def test_bounds_exponent_from_specs(capsys):
    code, out, _ = run(["bounds", "quantum-exponent", "--rate", "0.8", "--s", "-0.5", "--n", "1,2",
                        "--state", "phi:2", "--channel", "erasure:p=0.25,d=2", "--format", "json"], capsys)
    assert code == 0
    lines = [json.loads(x) for x in out.splitlines()]
    assert len(lines) == 2 and lines[1]["raw"] < lines[0]["raw"]


def test_verify_monotonicity(capsys):
    code, out, _ = run(["verify", "monotonicity", "--kind", "renyi:2", "--trials", "500", "--seed", "7"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["failures"] == 0 and rep["trials"] == 500 and rep["seed"] == 7


def test_verify_negative_tolerance_fails(capsys):
    code, out, _ = run(["verify", "sibson", "--trials", "5", "--tol", "-1"], capsys)
    assert code == 1
    assert json.loads(out)["failures"] == 5


def test_verify_unknown_check(capsys):
    code, _, err = run(["verify", "nonexistent"], capsys)
    assert code == 2


def test_compute_examples(capsys):
    code, out, _ = run(["compute", "kq", "--state", "phi:2", "--kind", "renyi:2"], capsys)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(math.log(2))
    code, out, _ = run(["compute", "g", "--state", "random:layout=2x3,rank=3,seed=4", "--s", "0"], capsys)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.0, abs=1e-12)
    code, out, _ = run(["compute", "coherent", "--state", "phi:2"], capsys)
    assert json.loads(out)["value"] == pytest.approx(math.log(2))


def test_compute_bad_spec(capsys):
    code, _, err = run(["compute", "kq", "--state", "warp:3", "--kind", "renyi:2"], capsys)
    assert code == 2
    code, _, _ = run(["compute", "kq", "--state", "missing.json", "--kind", "renyi:2"], capsys)
    assert code == 2
    code, _, _ = run(["compute", "kq", "--state", "phi:2", "--kind", "renyi:7"], capsys)
    assert code == 2


def test_compute_json_state_file(tmp_path, capsys):
    from sconv.states import max_entangled
    path = tmp_path / "phi.json"
    path.write_text(json.dumps(max_entangled(3).to_json()))
    code, out, _ = run(["compute", "coherent", "--state", str(path)], capsys)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(math.log(3))


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("SCONV_SEED", "13")
    code, out, _ = run(["verify", "sibson", "--trials", "3"], capsys)
    assert json.loads(out)["seed"] == 13


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[sconv]\ntrials = 4\nseed = 21\n")
    code, out, _ = run(["--config", str(cfg), "verify", "sibson"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["trials"] == 4 and rep["seed"] == 21


def test_output_files_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["bounds", "erasure-hockeystick", "--p", "0.3", "--dA", "2", "--rate", "0.9", "--n", "1..10"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sconv", "compute", "capacity", "--p", "0.25", "--dA", "2"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["value"] == pytest.approx(0.5 * math.log(2))
