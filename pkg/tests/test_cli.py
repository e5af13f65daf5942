import csv
import io
import json
import math
import subprocess
import sys

import pytest

from coulomb_tunnel import cli
from coulomb_tunnel.scatter import COLUMNS


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    return list(csv.reader(io.StringIO(text)))


# --- formatting ------------------------------------------------------------------


def test_fmt():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert cli.fmt(1.5e-20) == "1.5000000000000001e-20"
    assert cli.fmt(math.nan) == "nan"
    assert cli.fmt(-math.inf) == "-inf"
    assert cli.fmt(True) == "true"
    assert cli.fmt(7) == "7"
    assert cli.fmt("ok") == "ok"


def test_fmt_round_trips():
    for x in (1 / 3, 2.0**-1074, 123456789.123456789, -0.0):
        assert float(cli.fmt(x)) == x


def test_decade_windows():
    assert cli.decade_windows(1e-3, 1e-1) == [(1e-3, 1e-2), (1e-2, 1e-1)]
    assert cli.decade_windows(0.002, 0.5) == [(0.002, 0.01), (0.01, 0.1), (0.1, 0.5)]
    assert cli.decade_windows(2.0, 5.0) == [(2.0, 5.0)]


# --- scan ------------------------------------------------------------------------


def test_scan_csv(capsys):
    code, out, _ = run(capsys, "scan", "--u0", "1", "--emin", "0.01", "--emax", "10", "--points", "5")
    assert code == 0
    rows = parse_csv(out)
    assert tuple(rows[0]) == COLUMNS
    assert len(rows) == 6
    for r in rows[1:]:
        assert r[-1] == "ok"
        assert abs(float(r[1]) + float(r[2]) - 1) < 1e-9
        assert "E" not in "".join(r[:-1])


def test_scan_json_matches_csv(capsys):
    argv = ("scan", "--emin", "0.01", "--emax", "10", "--points", "4", "--grid", "linear")
    _, out_csv, _ = run(capsys, *argv)
    _, out_json, _ = run(capsys, *argv, "--format", "json")
    rows = parse_csv(out_csv)[1:]
    recs = json.loads(out_json)
    assert len(rows) == len(recs)
    for r, rec in zip(rows, recs):
        for i, col in enumerate(COLUMNS[:-1]):
            assert float(r[i]) == rec[col]
        assert r[-1] == rec["status"]


def test_scan_writes_file_and_svg(tmp_path, capsys):
    out, svg = tmp_path / "scan.csv", tmp_path / "scan.svg"
    code, stdout, _ = run(capsys, "scan", "--points", "6", "--out", str(out), "--svg", str(svg))
    assert code == 0 and stdout == ""
    assert len(out.read_text().splitlines()) == 7
    text = svg.read_text()
    assert text.startswith("<svg") and "polyline" in text


def test_scan_parallel_matches_serial(capsys):
    argv = ("scan", "--emin", "0.001", "--emax", "1", "--points", "12")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv, "--jobs", "3")
    assert a == b


@pytest.mark.parametrize(
    "argv",
    [
        ("scan", "--points", "0"),
        ("scan", "--u0", "-1"),
        ("scan", "--emin", "1", "--emax", "0.5"),
        ("scan", "--emin", "1e-9"),
        ("scan", "--grid", "cubic"),
        ("scan", "--jobs", "0"),
        ("frobnicate",),
        (),
    ],
)
def test_scan_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_floor_override(capsys, monkeypatch):
    monkeypatch.setenv("COULOMB_TUNNEL_EPS_FLOOR", "1e-8")
    code, out, _ = run(capsys, "scan", "--emin", "1e-7", "--emax", "1e-6", "--points", "2")
    # both energies are below the double-range limit: rows flagged, exit 1
    assert code == 1
    assert [r[-1] for r in parse_csv(out)[1:]] == ["underflow", "underflow"]


# --- point ------------------------------------------------------------------------


def test_point_record(capsys):
    code, out, _ = run(capsys, "point", "--epsilon", "1", "--format", "json")
    assert code == 0
    rec = json.loads(out)
    assert abs(rec["T"] + rec["R"] - 1) < 1e-9
    assert rec["a_r2_re"] == 1 and rec["a_l2_re"] == 1
    assert rec["im_a_r1"] != 0
    assert rec["status"] == "ok"
    for key in ("c_inc_re", "current_left", "current_right", "continuity_residual", "table_z_drift"):
        assert key in rec


def test_point_csv_matches_json(capsys):
    _, out_csv, _ = run(capsys, "point", "--epsilon", "0.3", "--u0", "2")
    _, out_json, _ = run(capsys, "point", "--epsilon", "0.3", "--u0", "2", "--format", "json")
    rows = parse_csv(out_csv)
    assert rows[0] == ["field", "value"]
    rec = json.loads(out_json)
    assert [r[0] for r in rows[1:]] == list(rec)
    for key, value in rows[1:]:
        if key == "status":
            assert value == rec[key]
        else:
            assert float(value) == rec[key]


def test_point_negative_energy(capsys):
    code, _, err = run(capsys, "point", "--epsilon", "-1")
    assert code == 2
    assert "epsilon" in err


def test_point_underflow_is_a_failure_with_null_json(capsys):
    code, out, _ = run(capsys, "point", "--epsilon", "1e-6", "--format", "json")
    assert code == 1
    rec = json.loads(out)
    assert rec["status"] == "underflow" and rec["T"] is None


# --- oscillations -------------------------------------------------------------------


def test_oscillations_report(capsys):
    code, out, err = run(capsys, "oscillations", "--window-lo", "1e-3", "--window-hi", "1e-1", "--points", "1500", "--jobs", "2")
    assert code == 0 and err == ""
    rows = parse_csv(out)
    assert tuple(rows[0]) == cli.OSC_COLUMNS
    counts = [int(r[3]) for r in rows[1:]]
    assert counts[0] > counts[1] > 0


def test_oscillations_high_energy_window_is_monotone(capsys):
    code, out, _ = run(capsys, "oscillations", "--window-lo", "10", "--window-hi", "100", "--points", "200")
    assert code == 0
    assert int(parse_csv(out)[1][3]) == 0


def test_oscillations_warns_when_under_resolved(capsys):
    code, _, err = run(capsys, "oscillations", "--window-lo", "1e-3", "--window-hi", "1e-2", "--points", "40")
    assert code == 0
    assert "warning" in err


@pytest.mark.parametrize(
    "argv",
    [("--window-lo", "0.1", "--window-hi", "0.01"), ("--points", "2"), ("--window-lo", "0")],
)
def test_oscillations_usage_errors(capsys, argv):
    assert run(capsys, "oscillations", *argv)[0] == 2


# --- cutoff -----------------------------------------------------------------------


def test_cutoff_table(capsys):
    code, out, _ = run(capsys, "cutoff", "--deltas", "0.1,0.01")
    assert code == 0
    rows = parse_csv(out)
    assert tuple(rows[0]) == cli.CUT_COLUMNS
    t = [float(r[1]) for r in rows[1:]]
    assert t[0] > t[1]


def test_cutoff_free_particle(capsys):
    code, out, _ = run(capsys, "cutoff", "--u0", "0", "--deltas", "0.1 0.001")
    assert code == 0
    for r in parse_csv(out)[1:]:
        assert abs(float(r[1]) - 1) < 1e-6


def test_cutoff_requires_deltas(capsys):
    assert run(capsys, "cutoff")[0] == 2
    assert run(capsys, "cutoff", "--deltas", "0.1,-1")[0] == 2
    assert run(capsys, "cutoff", "--deltas", "abc")[0] == 2


def test_cutoff_row_failure(capsys):
    code, out, _ = run(capsys, "cutoff", "--deltas", "0.1", "--epsilon", "100", "--step", "0.05")
    assert code == 1
    assert parse_csv(out)[1][-1].startswith("error:")


# --- selftest ------------------------------------------------------------------------


def test_selftest_passes(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    rows = parse_csv(out)
    assert rows[0] == ["check", "worst", "limit", "status"]
    assert len(rows) >= 9
    assert all(r[3] == "pass" for r in rows[1:])


def test_selftest_injected_tolerance_fails(capsys):
    code, out, _ = run(capsys, "selftest", "--tolerance", "1e-20")
    assert code == 1
    statuses = [r[3] for r in parse_csv(out)[1:]]
    assert "FAIL" in statuses


def test_selftest_bad_tolerance(capsys):
    assert run(capsys, "selftest", "--tolerance", "0")[0] == 2


# --- entry points ------------------------------------------------------------------------


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "coulomb_tunnel", "point", "--epsilon", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert "status,ok" in proc.stdout


def test_help_exits_cleanly(capsys):
    assert run(capsys, "--help")[0] == 0
