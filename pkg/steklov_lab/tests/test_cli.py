# tests/test_cli.py

import csv
import json

import numpy as np
import pytest

from steklov_lab.cli import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, main


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_oracle_command(capsys):
    assert main(["oracle", "--problem", "xi", "--k", "3"]) == EXIT_OK
    data = _json_out(capsys)
    assert data["lambda"] == 8.0
    assert data["multiplicity"] == 2
    assert data["multipliers"]["S1"] == pytest.approx(-1.0 / 6.0)


def test_oracle_rejects_negative_index(capsys):
    assert main(["oracle", "--problem", "theta", "--k", "-1"]) == EXIT_USAGE
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["status"] == "error"


def test_invalid_node_count(capsys):
    assert main(["solve", "--problem", "xi", "--n", "17"]) == EXIT_USAGE
    assert "N must be even and ≥ 32" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main(["solve", "--problem", "xi", "--bogus"]) == EXIT_USAGE
    assert main(["solve", "--problem", "lambda"]) == EXIT_USAGE
    assert main(["nodal", "--problem", "xi", "--mode-index", "-1"]) == EXIT_USAGE


def test_help_shows_defaults(capsys):
    assert main(["verify", "--help"]) == EXIT_OK
    out = " ".join(capsys.readouterr().out.split())
    assert "default: disk" in out
    assert "default: 256" in out


def test_solve_disk(capsys, tmp_path):
    traces = tmp_path / "traces.csv"
    matrix = tmp_path / "xi.csv"
    argv = [
        "solve", "--problem", "xi", "--domain", "disk", "--n", "64", "--modes", "5",
        "--traces", str(traces), "--export-operator", str(matrix),
    ]
    assert main(argv) == EXIT_OK
    data = _json_out(capsys)
    np.testing.assert_allclose(data["eigenvalues"], [2, 4, 4, 6, 6], rtol=1e-8)
    assert {"timestamp", "wall_clock_s"} <= set(data["metadata"])
    assert traces.read_text().startswith("t,phi_0")
    assert np.loadtxt(matrix, delimiter=",").shape == (64, 64)


def test_solve_is_byte_identical(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        argv = ["solve", "--problem", "pi", "--domain", "kite", "--n", "64", "--modes", "6", "--deterministic", "--out", str(path)]
        assert main(argv) == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert "metadata" not in json.loads(outs[0])


def test_too_many_modes(capsys):
    assert main(["solve", "--problem", "xi", "--n", "64", "--modes", "9"]) == EXIT_USAGE


def test_nodal_command(capsys, tmp_path):
    svg = tmp_path / "mode.svg"
    argv = [
        "nodal", "--problem", "xi", "--n", "64", "--grid", "61", "--collar", "0.1",
        "--mode-index", "1", "--svg", str(svg),
    ]
    assert main(argv) == EXIT_OK
    data = _json_out(capsys)
    assert data["lambda"] == pytest.approx(4.0)
    assert data["boundary_zero_count"] == 2
    assert data["length"] == pytest.approx(2.0, rel=0.05)
    assert svg.exists()


def test_verify_and_report(capsys, tmp_path):
    reports = tmp_path / "reports"
    reports.mkdir()
    out = reports / "symbols.json"
    assert main(["verify", "--suite", "symbols", "--deterministic", "--out", str(out), "--csv", str(tmp_path / "s.csv")]) == EXIT_OK
    data = json.loads(out.read_text())
    assert "metadata" not in data and data["pass"]

    failing = dict(data, suite="extra", checks=[dict(data["checks"][0], id="extra.one", **{"pass": False})])
    (reports / "extra.json").write_text(json.dumps(failing))
    (reports / "notes.json").write_text("[]")
    summary = tmp_path / "summary.csv"
    assert main(["report", "--in", str(reports), "--out", str(summary)]) == EXIT_CHECK_FAILED
    with summary.open(newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:2] == ["suite", "id"]
    assert len(rows) == 1 + 1 + 36
    assert rows[1][0] == "extra" and rows[1][-1] == "FAIL"


def test_report_needs_reports(tmp_path):
    assert main(["report", "--in", str(tmp_path), "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
