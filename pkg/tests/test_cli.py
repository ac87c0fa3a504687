"""Command-line behavior: exit codes, report shape, scan, verify."""
import json
import os

import numpy as np
import pytest

from conftest import fixture_path
from rdmcone.cli import main


def run(args):
    return main(args)


def test_solve_writes_schema_report(tmp_path):
    out = str(tmp_path / "report.json")
    code = run(["solve", "--hubbard", "L=2,U=4", "--tol", "1e-7",
                "--output", out])
    assert code == 0
    report = json.load(open(out))
    assert report["schema"] == "rdmcone-report/1"
    assert set(report) == {"schema", "config", "results", "runtime"}
    assert report["config"]["method"] == "primal"
    assert report["config"]["conditions"] == "dqg"
    assert report["results"]["converged"] is True
    assert report["results"]["energy"] == pytest.approx(-0.8284271, abs=1e-5)
    # optional blocks stay out unless requested
    assert "hf_check" not in report["results"]
    assert "rdm2" not in report["results"]
    assert "timestamp" in report["runtime"]


def test_solve_dual_report_carries_bound(tmp_path):
    out = str(tmp_path / "dual.json")
    code = run(["solve", "--hubbard", "L=2,U=4", "--conditions", "dqgt",
                "--output", out])
    assert code == 0
    report = json.load(open(out))
    assert report["config"]["method"] == "dual"
    res = report["results"]
    assert res["rigorous_bound"] <= res["energy"] + 1e-6
    assert res["rigorous_bound"] == pytest.approx(-0.8284271, abs=1e-5)
    assert len(res["bound_history"]) == res["outer_iterations"]


def test_solve_emit_rdm_block(tmp_path):
    out = str(tmp_path / "rdm.json")
    code = run(["solve", "--hubbard", "L=2,U=4", "--emit-rdm",
                "--output", out])
    assert code == 0
    block = json.load(open(out))["results"]["rdm2"]
    d = 6  # four spin orbitals
    assert len(block["lower_triangle"]) == d * (d + 1) // 2
    assert "lower triangle" in block["ordering"]
    assert block["r"] == 4


def test_solve_hf_check_field(tmp_path):
    out = str(tmp_path / "hf.json")
    code = run(["solve", "--hubbard", "L=2,U=4", "--conditions", "dq",
                "--method", "dual", "--hf-check", "--output", out])
    assert code == 0
    hf = json.load(open(out))["results"]["hf_check"]
    assert abs(hf["difference"]) < 1e-3


def test_input_errors_exit_one(tmp_path, capsys):
    out = str(tmp_path / "never.json")
    assert run(["solve", "--output", out]) == 1
    assert run(["solve", "--fcidump", "/nonexistent/x.fcidump",
                "--output", out]) == 1
    err = capsys.readouterr().err
    assert "/nonexistent/x.fcidump" in err
    assert run(["solve", "--hubbard", "L=2,U=nope", "--output", out]) == 1
    # primal has no pair creation-annihilation block
    assert run(["solve", "--hubbard", "L=2,U=4", "--conditions", "dqgt",
                "--method", "primal", "--output", out]) == 1
    # no partial file may appear on input errors
    assert not os.path.exists(out)


def test_malformed_fcidump_names_line(tmp_path, capsys):
    bad = tmp_path / "bad.fcidump"
    bad.write_text("&FCI NORB=2,NELEC=2,MS2=0\n&END\n garbage 1 1 1 1\n")
    assert run(["solve", "--fcidump", str(bad)]) == 1
    assert "line 3" in capsys.readouterr().err


def test_nonconvergence_exits_two_but_reports(tmp_path):
    out = str(tmp_path / "partial.json")
    code = run(["solve", "--hubbard", "L=4,U=4", "--tol", "1e-9",
                "--max-iterations", "5", "--output", out])
    assert code == 2
    report = json.load(open(out))
    assert report["results"]["converged"] is False


def test_solve_fcidump_fixture(tmp_path):
    out = str(tmp_path / "h2.json")
    code = run(["solve", "--fcidump", fixture_path("h2_sto3g.fcidump"),
                "--with-fci", "--orbdata", fixture_path("h2_sto3g.orbdata"),
                "--output", out])
    assert code == 0
    res = json.load(open(out))["results"]
    assert res["fci"]["energy"] == pytest.approx(-1.1372759, abs=1e-6)
    assert abs(res["fci"]["solver_minus_fci"]) < 1e-4
    # zero up to the solver's own density error at the default tolerance
    assert res["properties"]["dipole_magnitude_debye"] == pytest.approx(
        0.0, abs=1e-4)
    assert sum(res["properties"]["mulliken_charges"]) == pytest.approx(
        0.0, abs=1e-4)


def test_scan_orders_rows_and_flags_failures(tmp_path):
    out = str(tmp_path / "scan.csv")
    code = run(["scan", "--hubbard", "L=2", "--u-list", "0,8,4",
                "--max-outer", "12", "--output", out])
    assert code == 0
    lines = open(out).read().strip().split("\n")
    header = lines[0].split(",")
    assert header[0] == "label"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["L2-U0", "L2-U8", "L2-U4"]
    for ln in lines[1:]:
        cells = dict(zip(header, ln.split(",")))
        gap = float(cells["gap_dqg"])
        assert gap > -1e-6  # relaxation never sits above the exact energy
        assert cells["error"] == ""


def test_scan_empty_input_is_an_error():
    assert run(["scan"]) == 1


def test_scan_parallel_matches_serial(tmp_path):
    a = str(tmp_path / "serial.csv")
    b = str(tmp_path / "parallel.csv")
    argsa = ["scan", "--hubbard", "L=2", "--u-list", "0,4", "--max-outer",
             "12", "--output", a]
    argsb = ["scan", "--hubbard", "L=2", "--u-list", "0,4", "--max-outer",
             "12", "--jobs", "2", "--output", b]
    assert run(argsa) == 0
    assert run(argsb) == 0
    assert open(a).read() == open(b).read()


def test_thread_env_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("RDMCONE_THREADS", "not-a-number")
    assert run(["scan", "--hubbard", "L=2", "--u-list", "0",
                "--jobs", "2"]) == 1


def test_verify_filter_and_exit(capsys):
    code = run(["verify", "--only", "oracle"])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS oracle-energy" in out
    assert run(["verify", "--only", "no-such-check"]) == 1
