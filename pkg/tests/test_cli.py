import csv
import io
import math
import subprocess
import sys
from pathlib import Path

import pytest

from abphase.cli import figure_f_rows, main
from abphase.model import SetupConfig

SAMPLES = Path(__file__).resolve().parents[1] / "samples"


def _phase_row(text):
    row = next(csv.DictReader(io.StringIO(text)))
    return {k: float(v) for k, v in row.items()}


def test_phase_temporal_and_coulomb(capsys):
    assert main(["phase", str(SAMPLES / "path1.txt"), "--config", str(SAMPLES / "default.json")]) == 0
    a = _phase_row(capsys.readouterr().out)
    assert a["theta_total"] == pytest.approx(math.pi, abs=1e-6) and a["theta_e"] == 0.0
    assert main(["phase", str(SAMPLES / "path1.txt"), "--gauge", "coulomb"]) == 0
    b = _phase_row(capsys.readouterr().out)
    assert b["theta_total"] == pytest.approx(a["theta_total"], abs=1e-6)
    assert b["theta_e"] != 0.0 and b["theta_m"] != 0.0


def test_phase_late_rejoin_is_zero(capsys):
    assert main(["phase", str(SAMPLES / "path1_late.txt")]) == 0
    assert abs(_phase_row(capsys.readouterr().out)["theta_total"]) < 1e-6


def test_phase_open_path(capsys):
    assert main(["phase", str(SAMPLES / "open.txt")]) == 2
    assert "loop not closed" in capsys.readouterr().err


def test_phase_core_violation(tmp_path, capsys):
    p = tmp_path / "core.txt"
    p.write_text("-0.25 0.01 -0.25\n0.5 0.01 -0.25\n0.5 0.01 0.25\n-0.25 0.01 0.25\nclosed\n")
    assert main(["phase", str(p), "--gauge", "coulomb"]) == 3
    assert "exclusion zone" in capsys.readouterr().err


def test_config_from_environment(tmp_path, monkeypatch, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"eps_y": 0.5}')
    monkeypatch.setenv("ABPHASE_CONFIG", str(bad))
    assert main(["figure-f"]) == 2
    assert "eps_y exceeds L/10" in capsys.readouterr().err
    # an explicit --config wins over the environment
    assert main(["figure-f", "--config", str(SAMPLES / "default.json"), "--samples", "3"]) == 0


def test_figure_f_jump_and_continuity():
    rows = figure_f_rows(SetupConfig(), [0.5, -0.5], (-2.0, 2.0), 9)
    col = {(x, repr(y)): f for x, y, f in rows}
    assert col[(0.5, "0.0")] - col[(0.5, "-0.0")] == pytest.approx(math.pi, abs=1e-12)
    assert col[(-0.5, "0.0")] == col[(-0.5, "-0.0")]


@pytest.mark.parametrize("ymax", [100.0, 1000.0])
def test_figure_f_decays_like_inverse_y(capsys, ymax):
    # F ~ L/(2y) far away: 5e-3 at 100 L, below 1e-3 only from 500 L on
    assert main(["figure-f", "--x-values", "0.5", "--y-range", str(-ymax), str(ymax), "--samples", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "x,y,F"
    far = [float(l.split(",")[2]) for l in lines[1:] if abs(float(l.split(",")[1])) == ymax]
    assert len(far) == 2
    assert max(map(abs, far)) == pytest.approx(math.atan(0.5 / ymax), rel=1e-12)


@pytest.mark.parametrize(
    "argv",
    [
        ["figure-f", "--samples", "1"],
        ["figure-f", "--y-range", "1", "-1"],
        ["figure-f", "--x-values", "a,b"],
        ["phase"],
        ["bogus"],
    ],
)
def test_usage_errors(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_figure_f_on_core_is_geometric_error():
    assert main(["figure-f", "--x-values", "0.0"]) == 3


def test_gauge_output_is_byte_identical(tmp_path, capsys):
    outs = []
    for k in range(2):
        out, rep = tmp_path / f"l{k}.csv", tmp_path / f"r{k}.txt"
        assert main(["gauge", "--n", "33", "17", "--out", str(out), "--report", str(rep)]) == 0
        outs.append((out.read_bytes(), rep.read_bytes()))
    assert outs[0] == outs[1]
    assert b"iterations:" in outs[0][1]
    assert "wall_time_s" in capsys.readouterr().err


def test_fields_and_sources(tmp_path, capsys):
    assert main(["fields", "--n", "3", "5", "5"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "t,x,y,Ex,Ey,Bz,rho,jx,jy" and len(out) == 1 + 75
    assert main(["sources", "--setup", "toroidal", "--out", str(tmp_path / "s.csv")]) == 0
    assert (tmp_path / "s.csv").read_text().startswith("t,x,y,")


def test_verify_negative_control(tmp_path, capsys):
    out = tmp_path / "report.csv"
    assert main(["--threads", "4", "verify", "--drop-solenoids", "--out", str(out)]) == 1
    err = capsys.readouterr().err
    assert "ampere_rect" in err
    assert out.read_text().startswith("check,measured,expected,tolerance,pass,order\n")


def test_verify_default_config_passes(capsys):
    assert main(["--threads", "4", "verify"]) == 0
    text = capsys.readouterr().out
    assert "FAIL" not in text


def test_module_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "abphase", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("phase", "fields", "sources", "gauge", "figure-f", "verify"):
        assert sub in res.stdout
