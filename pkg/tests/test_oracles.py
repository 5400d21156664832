import math

import pytest

from abphase.model import RegularizationParams
from abphase.oracles import (
    OracleReport,
    check_ampere,
    check_continuity,
    check_delta_identities,
    check_eps_convergence,
    check_gauge_invariance,
    check_non_radiating,
    random_loops,
    reports_csv,
)
from abphase.phase import QuadratureSpec

SPEC = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-12)


def test_report_pass_rule():
    assert OracleReport.compare("a", 1.0005, 1.0, 1e-3).passed
    assert not OracleReport.compare("a", 1.002, 1.0, 1e-3).passed


def test_reports_csv_layout():
    text = reports_csv([OracleReport.compare("x", 0.5, 0.0, 1.0, 2.0)])
    assert text == "check,measured,expected,tolerance,pass,order\nx,0.5,0.0,1.0,true,2.0\n"


def test_delta_identities_converge():
    reps = {r.name: r for r in check_delta_identities()}
    assert set(reps) >= {"delta_a", "delta_b", "delta_c", "delta_d", "delta_a_at_zero"}
    assert all(r.passed for r in reps.values())
    assert reps["delta_c"].measured == pytest.approx(2 * math.pi, abs=1e-3)
    assert reps["delta_a_at_zero"].measured == 0.0


def test_delta_example_on_truncated_range_is_short_of_one():
    # (2/pi) arctan(100/0.5): truncating |y| <= 100 loses 3e-3, above 1e-3
    assert abs(2 / math.pi * math.atan(100 / 0.5) - 1.0) > 1e-3


@pytest.mark.parametrize("setup, v", [("rect", None), ("rhombus", 0.5), ("rhombus", 2.0), ("toroidal", None)])
def test_non_radiating(cfg, reg, setup, v):
    assert check_non_radiating(cfg, reg, setup, seed=1, v=v).passed


def test_negative_control_is_caught_by_wave_equation(cfg, reg):
    assert check_ampere(cfg, reg).passed
    assert not check_ampere(cfg, reg, solenoids=False).passed
    # continuity cannot see it: the solenoid current is divergence-free
    assert check_continuity(cfg, reg, "rect", solenoids=False).passed


def test_eps_convergence(cfg, reg):
    rep = check_eps_convergence(cfg, reg, SPEC)
    assert rep.passed and rep.order >= 1


def test_random_loops_deterministic(cfg, reg):
    import numpy as np

    a = random_loops(cfg, reg, np.random.default_rng(7))
    b = random_loops(cfg, reg, np.random.default_rng(7))
    assert a == b and len(a) >= 10


def test_gauge_invariance_battery(cfg):
    reg = RegularizationParams(0.02, 0.02, 0.02, 0.06)
    reps = check_gauge_invariance(cfg, reg, SPEC, seed=3)
    assert all(r.passed for r in reps)
