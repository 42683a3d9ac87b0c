"""Command line contract: exit codes, payload schema, determinism."""

import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from gamma_monodromy import cli
from gamma_monodromy.numerics import NumericsError


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def test_parse_space():
    assert cli.parse_space("proj:2") == ("proj", 2)
    assert cli.parse_space("twisted:4") == ("twisted", 4)
    assert cli.parse_space("blproj:3") == ("blproj", 3)
    for bad in ("weird:3", "proj", "proj:x", "proj:-1", "", None):
        with pytest.raises(cli.UsageError):
            cli.parse_space(bad)


def test_check_tol_window():
    assert cli._check_tol(1e-4) == 1e-4
    with pytest.raises(cli.UsageError):
        cli._check_tol(1e-2)
    with pytest.raises(cli.UsageError):
        cli._check_tol(1e-13)


def test_branch_value():
    assert abs(cli._branch_value([2.0, 0.0], "--q") - 2.0) < 1e-15
    assert abs(cli._branch_value([1.0, 1.0], "--q") + 1.0) < 1e-15
    assert abs(cli._branch_value([1.0, 0.5], "--q") - 1j) < 1e-15
    with pytest.raises(cli.UsageError):
        cli._branch_value([-1.0, 0.0], "--q")
    with pytest.raises(cli.UsageError):
        cli._branch_value(None, "--q")


def test_missing_subcommand_exits_usage():
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == cli.EXIT_USAGE


def test_usage_errors_return_64():
    assert cli.main(["reflections", "--space", "weird:3",
                     "--q", "1"]) == cli.EXIT_USAGE
    assert cli.main(["reflections", "--space", "proj:1"]) == cli.EXIT_USAGE
    assert cli.main(["reflections", "--space", "proj:1", "--q", "1",
                     "--k", "7"]) == cli.EXIT_USAGE
    assert cli.main(["phi", "--space", "twisted:3",
                     "--q", "1"]) == cli.EXIT_USAGE
    assert cli.main(["phi", "--space", "proj:1", "--q", "1",
                     "--q-arg", "0.5"]) == cli.EXIT_USAGE
    assert cli.main(["suite", "--only", "nonsense"]) == cli.EXIT_USAGE


# ---------------------------------------------------------------------------
# reflections command
# ---------------------------------------------------------------------------

def test_reflections_json_payload(tmp_path):
    out = tmp_path / "refl.json"
    rc = cli.main(["reflections", "--space", "proj:1", "--q", "1",
                   "--k", "0", "--out", str(out)])
    assert rc == cli.EXIT_OK
    data = json.loads(out.read_text())
    assert data["schema"] == "gamma-monodromy/1"
    assert data["pass"] is True
    (entry,) = data["results"]
    assert entry["k"] == 0
    assert entry["sign"] in (1, -1)
    assert entry["residual"] < entry["tolerance"]
    assert entry["pairing_residual"] < entry["pairing_tolerance"]
    # complex numbers are [re, im] pairs
    assert all(len(z) == 2 for z in entry["alpha"])


def test_reflections_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["reflections", "--space", "proj:1", "--q", "1", "--k", "1"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_reflections_twisted_payload(tmp_path):
    out = tmp_path / "tw.json"
    rc = cli.main(["reflections", "--space", "twisted:3", "--Q", "1",
                   "--k", "0", "--out", str(out)])
    assert rc == cli.EXIT_OK
    data = json.loads(out.read_text())
    (entry,) = data["results"]
    assert entry["constant_deviation"] < entry["tolerance"]
    assert entry["pairing_residual"] < entry["pairing_tolerance"]


def test_reflections_tolerance_breach_exits_1(tmp_path, monkeypatch):
    # a candidate that cannot match forces residual above tolerance
    monkeypatch.setattr(
        cli, "psi_map",
        lambda space, kcl, q_log: np.full(space.size, 37.0, dtype=complex))
    out = tmp_path / "breach.json"
    rc = cli.main(["reflections", "--space", "proj:1", "--q", "1",
                   "--k", "0", "--out", str(out)])
    assert rc == cli.EXIT_FAIL
    assert json.loads(out.read_text())["pass"] is False


def test_numerical_failure_exits_2(monkeypatch, capsys):
    def boom(*a, **k):
        raise NumericsError("synthetic blowup")

    monkeypatch.setattr(cli, "monodromy_matrix", boom)
    rc = cli.main(["reflections", "--space", "proj:1", "--q", "1",
                   "--k", "0"])
    assert rc == cli.EXIT_NUMERIC
    assert "numerical failure" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# phi command
# ---------------------------------------------------------------------------

def test_phi_json_payload(tmp_path):
    out = tmp_path / "phi.json"
    rc = cli.main(["phi", "--space", "proj:1", "--q", "1", "--m", "3",
                   "--out", str(out)])
    assert rc == cli.EXIT_OK
    data = json.loads(out.read_text())
    assert data["pass"] is True
    assert data["n"] == 3 and data["m"] == 3
    assert data["branch_point"] == 2.0
    assert data["zero_region"]["max_abs"] < data["zero_region"]["tolerance"]
    comp = data["comparison"]
    assert comp["max_abs_diff"] < comp["tolerance"]
    assert len(comp["rows"]) == 10
    fit = data["exponent_fit"]
    assert fit["expected"] == 2.5
    assert fit["deviation"] < fit["tolerance"]


def test_phi_csv_contract(tmp_path):
    out = tmp_path / "phi.csv"
    rc = cli.main(["phi", "--space", "proj:1", "--q", "1", "--m", "3",
                   "--format", "csv", "--out", str(out)])
    assert rc == cli.EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "lambda,re_phi_series,re_phi_mb,abs_diff"
    assert len(lines) == 11
    first = [float(x) for x in lines[1].split(",")]
    assert len(first) == 4
    assert first[3] < 1e-6


# ---------------------------------------------------------------------------
# suite command
# ---------------------------------------------------------------------------

def test_suite_single_criterion(tmp_path, capsys):
    out = tmp_path / "suite.json"
    rc = cli.main(["suite", "--only", "calibration", "--out", str(out)])
    assert rc == cli.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("PASS")
    assert "calibration" in lines[0]
    data = json.loads(out.read_text())
    assert data["pass"] is True
    # timings are kept out of the stored payload
    assert "seconds" not in json.dumps(data)


def test_console_script_usage_error():
    exe = shutil.which("gamma-monodromy")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run([exe, "reflections", "--space", "nope"],
                          capture_output=True, text=True)
    assert proc.returncode == cli.EXIT_USAGE
    assert "error" in proc.stderr


def test_module_entry_point_matches():
    proc = subprocess.run([sys.executable, "-m", "gamma_monodromy.cli",
                           "phi", "--space", "proj:1", "--q", "-2"],
                          capture_output=True, text=True)
    assert proc.returncode == cli.EXIT_USAGE
