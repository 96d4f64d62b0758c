import csv
import io
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmcalc import cli, report
from mmcalc.config import parse_config
from mmcalc.errors import ConfigError
from mmcalc.suites import run_cases, run_suite


# -- config -----------------------------------------------------------------

def test_parse_config_types_and_params():
    cfg = parse_config("""
        # geometry sweep
        suite = geometry
        shapes = sphere, torus
        resolutions = 16 32
        order = 4
        tolerance = 1e-3
        shape.radius = 2   # comment
    """)
    assert cfg.suite == "geometry"
    assert cfg.get("shapes") == ["sphere", "torus"]
    assert cfg.get("resolutions") == [16, 32]
    assert cfg.get("missing", 7) == 7
    assert cfg.params_for("shape") == {"radius": 2.0}


@pytest.mark.parametrize("text,suite", [
    ("bogus = 1", "geometry"),
    ("order = 4\norder = 6", "geometry"),
    ("order four", "geometry"),
    ("order = four", "geometry"),
    ("suite = laws", "geometry"),
    ("resolutions = 32", "geometry"),
    ("resolutions = 4 8", "ns"),
    ("format = xml", "laws"),
    ("shape.radius = big", "geometry"),
    ("curvature_sign = 2", "evolve"),
    ("order = ", "geometry"),
    ("", "nonsense"),
])
def test_parse_config_rejects(text, suite):
    with pytest.raises(ConfigError):
        parse_config(text, suite)


def test_single_resolution_allowed_for_fixed_runs():
    assert parse_config("resolutions = 32", "evolve").get("resolutions") == [32]


# -- report -----------------------------------------------------------------

def rows3():
    return [
        report.make_row("geometry", "sphere:H", 32, 1.0 / 3, 0.3333, 3.3e-5, 1e-3),
        report.make_row("geometry", "sphere:order", "32->64", 4.01, 2.0, 0.0, 0.0, order=4.01),
        report.make_row("ns", "shear:residual", "8x64x8", 2e-3, 0.0, 2e-3, 1e-10),
    ]


def test_csv_header_and_row_count():
    text = report.to_csv(rows3()[:1])
    lines = text.splitlines()
    assert lines[0] == ",".join(report.COLUMNS)
    assert len(lines) == 2
    rec = next(csv.DictReader(io.StringIO(text)))
    assert rec["passed"] == "true"
    assert rec["order"] == ""
    assert float(rec["measured"]) == 1.0 / 3


def test_csv_and_json_round_trip():
    rows = rows3()
    assert report.from_csv(report.to_csv(rows)) == rows
    assert report.from_json(report.to_json(rows)) == rows
    assert [r.passed for r in rows] == [True, True, False]


@given(st.floats(allow_nan=False, allow_infinity=False), st.floats(0, 1e300))
def test_full_precision_formatting(x, tol):
    assert float(report.fmt(x)) == x
    r = report.make_row("laws", "c", 1, x, x, abs(x) if math.isfinite(abs(x)) else 0.0, tol)
    assert report.from_csv(report.to_csv([r]))[0] == r


def test_passed_flag_is_derived():
    assert not report.make_row("s", "c", 1, 0, 0, float("nan"), 1.0).passed
    assert report.make_row("s", "c", 1, 0, 0, 0.0, 0.0).passed
    with pytest.raises(ValueError):
        report.ReportRow("s", "c", "1", 0.0, 0.0, 1.0, None, 0.5, True)


def test_observed_order():
    assert report.observed_order(1e-2, 1e-2 / 16, 32, 64) == pytest.approx(4.0)
    assert report.observed_order(0.0, 1e-3, 32, 64) is None


def test_atomic_write_leaves_no_temp_files(tmp_path):
    p = tmp_path / "r.csv"
    report.emit_report(rows3(), str(p))
    report.emit_report(rows3()[:1], str(p))
    assert p.read_text().count("\n") == 2
    assert os.listdir(tmp_path) == ["r.csv"]


def test_table_csv():
    text = report.table_csv(("t", "x"), [(0.0, 0.1), (1.0, None)])
    assert text.splitlines() == ["t,x", "0,0.10000000000000001", "1,"]


# -- runner and CLI -----------------------------------------------------------

def test_case_order_is_independent_of_threads(monkeypatch):
    cases = [lambda k=k: [k] for k in range(8)]
    monkeypatch.setenv("MM_THREADS", "4")
    assert run_cases(cases) == list(range(8))
    monkeypatch.setenv("MM_THREADS", "x")
    with pytest.raises(ConfigError):
        run_cases(cases)


def test_laws_suite_bytes_are_reproducible(monkeypatch):
    cfg = lambda: parse_config("n_fields = 6\nresolutions = 16\nseed = 3", "laws")
    a = report.to_csv(run_suite(cfg()))
    monkeypatch.setenv("MM_THREADS", "3")
    b = report.to_csv(run_suite(cfg()))
    assert a == b
    c = report.to_csv(run_suite(parse_config("n_fields = 6\nresolutions = 16\nseed = 4", "laws")))
    assert c != a


def test_cli_success_and_json(tmp_path, capsys):
    cfg = tmp_path / "laws.cfg"
    cfg.write_text("n_fields = 4\nresolutions = 32\n")
    out = tmp_path / "laws.json"
    assert cli.main(["laws", "--config", str(cfg), "--out", str(out), "--format", "json", "--seed", "9"]) == 0
    rows = report.from_json(out.read_text())
    assert rows and all(r.suite == "laws" for r in rows)


def test_cli_bad_config_writes_nothing(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("resolutions = 32\nwibble = 1\n")
    out = tmp_path / "out.csv"
    assert cli.main(["geometry", "--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()
    assert "wibble" in capsys.readouterr().err
    assert cli.main(["geometry", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_cli_failing_rows_exit_one(tmp_path, capsys):
    cfg = tmp_path / "tight.cfg"
    cfg.write_text("shapes = sphere\nresolutions = 16 32\ntolerance = 1e-14\n")
    out = tmp_path / "g.csv"
    assert cli.main(["geometry", "--config", str(cfg), "--out", str(out)]) == 1
    assert "FAIL geometry" in capsys.readouterr().err
    assert out.exists()


def test_evolve_trajectory_columns(tmp_path):
    traj = tmp_path / "traj.csv"
    cfg = parse_config(f"mode = compressible\nresolutions = 16\norder = 4\nperiods = 0.05\ntrajectory = {traj}",
                       "evolve")
    run_suite(cfg)
    recs = list(csv.DictReader(traj.open()))
    assert list(recs[0]) == ["t", "R_mean", "C_max", "H_mean", "area", "volume", "mass"]
    assert float(recs[0]["t"]) == 0.0 and len(recs) > 2


def test_console_script_entry_point(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense\n")
    proc = subprocess.run([sys.executable, "-m", "mmcalc.cli", "ns", "--config", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert proc.stdout == ""
