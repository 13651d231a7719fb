import json
import subprocess
import sys

import pytest

from teugels.cli import RunConfig, main, run_verify


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# ------------------------------------------------------------------ gamma
def test_gamma_order_three(tmp_path, capsys):
    code, _, _ = run(["gamma", "--max-order", "3", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "x1^3 + 3 x1 x2 + x3" in (tmp_path / "gamma.txt").read_text()
    data = json.loads((tmp_path / "gamma.json").read_text())
    assert [p["order"] for p in data["polynomials"]] == [0, 1, 2, 3]
    assert data["oracle_mismatches"] == []


def test_gamma_order_zero(capsys):
    code, out, _ = run(["gamma", "--max-order", "0"], capsys)
    assert code == 0
    assert out == "gamma_0 = 1\n"


def test_gamma_order_twelve_passes_oracle(tmp_path, capsys):
    code, _, _ = run(["gamma", "--max-order", "12", "--out", str(tmp_path), "--format", "json"], capsys)
    assert code == 0
    data = json.loads((tmp_path / "gamma.json").read_text())
    assert data["oracle_checked_up_to"] == 12 and not data["oracle_mismatches"]
    assert not (tmp_path / "gamma.txt").exists()


def test_gamma_cap(capsys):
    code, _, err = run(["gamma", "--max-order", "25"], capsys)
    assert code == 2
    assert "order too large" in err


# ---------------------------------------------------------------- charlier
def test_charlier_table(tmp_path, capsys):
    code, out, _ = run(["charlier", "table", "--max-order", "3", "--out", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads((tmp_path / "charlier.json").read_text())
    assert [r["lambda"] for r in data["orders"]] == [["1"], ["1", "2"], ["1", "6", "6"]]
    assert all(r["expansion"]["raw-argument-weighted"] for r in data["orders"])
    assert data["orders"][0]["expansion"]["compensated-unweighted"] is False
    assert "[1, 6, 6]" in (tmp_path / "charlier.txt").read_text()


def test_charlier_bounds(capsys):
    assert run(["charlier", "--max-order", "13"], capsys)[0] == 2


# ----------------------------------------------------------------- convert
def test_convert(capsys, tmp_path):
    code, out, _ = run(["convert", "--to", "moments", "[1, 1, 1]"], capsys)
    assert code == 0 and json.loads(out) == ["1", "2", "5"]
    f = tmp_path / "m.json"
    f.write_text('[0, 1, 0, 3]')
    code, out, _ = run(["convert", "--to", "cumulants", "--input", str(f)], capsys)
    assert json.loads(out) == ["0", "1", "0", "0"]
    code, out, _ = run(["convert", "--to", "moments", '["1/2", 0.25]'], capsys)
    assert json.loads(out) == ["1/2", "1/2"]
    assert run(["convert", "--to", "moments", "[]"], capsys)[0] == 2
    assert run(["convert", "--to", "moments", "nope"], capsys)[0] == 2


# ---------------------------------------------------------------- simulate
def test_simulate_with_dumps(tmp_path, capsys):
    argv = ["simulate", "--spec", "cox_t2", "--paths", "200", "--grid-cells", "16", "--out", str(tmp_path)]
    code, _, _ = run(argv + ["--dump-paths", "2", "--format", "csv,json"], capsys)
    assert code == 0
    lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert lines[0] == "t,mean_x,stderr_mean_x,var_x,F2" and len(lines) == 18
    assert sorted(p.name for p in (tmp_path / "paths").iterdir()) == [
        "path_000000.csv",
        "path_000000.json",
        "path_000001.csv",
        "path_000001.json",
    ]
    cfg = json.loads((tmp_path / "config.json").read_text())
    assert cfg["seed"] == 20240607 and cfg["command"] == "simulate"


def test_simulate_rejects_invalid_spec(tmp_path, capsys):
    spec = tmp_path / "bad.json"
    spec.write_text(json.dumps({"atoms": [{"size": 1, "intensity": {"kind": "step", "at": 0.5, "height": 1}}]}))
    code, _, err = run(["simulate", "--spec", str(spec), "--paths", "10"], capsys)
    assert code == 2 and "[validate]" in err


# ------------------------------------------------------------------ verify
VERIFY = ["verify", "--spec", "cox_t2", "--paths", "4000", "--grid-cells", "256", "--orders", "1-3"]


def test_verify_cox_passes(tmp_path, capsys):
    code, out, _ = run(VERIFY + ["--out", str(tmp_path)], capsys)
    assert code == 0, out
    assert out.rstrip().endswith("overall: PASS")
    bundle = json.loads((tmp_path / "report.json").read_text())
    assert bundle["ok"] and bundle["config"]["seed"] == 20240607
    assert [r["order"] for r in bundle["martingale"]] == [1, 2, 3]
    assert [r["order"] for r in bundle["decomposition"]] == [1, 2, 3]
    assert {(c["n"], c["m"]) for c in bundle["covariation"]} == {
        (n, m) for n in range(1, 8) for m in range(n, 8) if n + m <= 8
    }


def test_verify_decreasing_intensity_fails_at_validate(tmp_path, capsys):
    spec = tmp_path / "dec.json"
    spec.write_text(
        json.dumps(
            {"atoms": [{"size": 1, "intensity": {"kind": "piecewise_linear", "times": [0, 0.5, 1], "values": [0, 1, 0.5]}}]}
        )
    )
    code, _, err = run(["verify", "--spec", str(spec), "--paths", "100"], capsys)
    assert code == 2
    assert "[validate]" in err and "monotonicity violation" in err


def test_verify_missing_spec(capsys):
    code, _, err = run(["verify", "--spec", "/no/such/file.json"], capsys)
    assert code == 2 and "[load]" in err


def test_verify_negative_control(tmp_path, capsys):
    code, out, _ = run(VERIFY + ["--negative-control", "--out", str(tmp_path)], capsys)
    assert code == 0
    neg = json.loads((tmp_path / "report.json").read_text())["negative_control"]
    assert neg["ok"] and all(e["verdict"] == "fail" for e in neg["entries"])
    assert "[negative control]" in out


def test_verify_gaussian_skips_decomposition(capsys):
    code, out, _ = run(["verify", "--spec", "symmetric_pm1_gauss", "--paths", "4000", "--grid-cells", "64"], capsys)
    assert code == 0
    assert "decomposition: skipped" in out


def test_verify_bundle_is_byte_identical(tmp_path, capsys):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    base = ["verify", "--spec", "symmetric_pm1", "--paths", "9000", "--grid-cells", "64", "--orders", "1,2"]
    run(base + ["--out", str(a)], capsys)
    run(base + ["--out", str(b)], capsys)
    run(base + ["--out", str(c), "--workers", "3"], capsys)
    for name in ("report.json", "report.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes() == (c / name).read_bytes()


def test_bundle_regenerates_from_embedded_config():
    cfg = RunConfig("verify", "cox_t", [1, 2], 64, 1.0, 3000, 5, [[0.25, 0.5], [0.5, 1.0]])
    _, bundle, _, _ = run_verify(cfg)
    again = RunConfig(**bundle["config"])
    _, bundle2, _, _ = run_verify(again)
    assert json.dumps(bundle, sort_keys=True) == json.dumps(bundle2, sort_keys=True)


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "teugels", "convert", "--to", "moments", "[0, 1]"], capture_output=True, text=True
    )
    assert out.returncode == 0 and json.loads(out.stdout) == ["0", "1"]


def test_usage_errors():
    with pytest.raises(SystemExit):
        main(["convert", "--to", "moments"])
    with pytest.raises(SystemExit):
        main(["verify", "--spec", "cox_t2", "--orders", "0"])
