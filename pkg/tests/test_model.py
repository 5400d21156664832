import json
import math

import pytest

from abphase.model import (
    ConfigError,
    PathError,
    PhaseBreakdown,
    PolyPath,
    RegularizationParams,
    SetupConfig,
    SpacetimePoint,
    CylPoint,
    dump_config,
    load_config,
    path_length,
    read_path,
    validate_config,
    write_path,
)


def test_default_config_validates(cfg, reg):
    assert validate_config(cfg, reg) == (cfg, reg)


@pytest.mark.parametrize(
    "cfg_kw, reg_kw, message",
    [
        ({"L": -1.0}, {}, "L must be positive"),
        ({}, {"eps_y": 0.5, "core_radius": 2.0}, "eps_y exceeds L/10"),
        ({}, {"eps_t": 0.2, "core_radius": 0.6}, "eps_t exceeds T/10"),
        ({}, {"core_radius": 0.02}, "core_radius below 3*max(eps_x, eps_y)"),
        ({"v": -0.1}, {}, "v must be non-negative"),
        ({"T": math.inf}, {}, "configuration values must be finite"),
    ],
)
def test_config_errors(cfg_kw, reg_kw, message):
    with pytest.raises(ConfigError, match=message.replace("*", r"\*").replace("(", r"\(").replace(")", r"\)")):
        validate_config(SetupConfig(**cfg_kw), RegularizationParams(**reg_kw))


def test_load_config_roundtrip(tmp_path, cfg, reg):
    p = tmp_path / "c.json"
    p.write_text(dump_config(cfg, reg))
    assert load_config(p) == (cfg, reg)


def test_load_config_partial_and_unknown(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"L": 2.0}))
    cfg, reg = load_config(p)
    assert cfg.L == 2.0 and reg.eps_x == 0.01
    p.write_text(json.dumps({"L": 2.0, "bogus": 1}))
    with pytest.raises(ConfigError, match="unknown config keys: bogus"):
        load_config(p)
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)


def test_points_must_be_finite():
    with pytest.raises(ValueError):
        SpacetimePoint(0.0, math.nan, 0.0)
    with pytest.raises(ValueError):
        CylPoint(0.0, -1.0, 0.0)


def test_path_length():
    square = PolyPath.loop([(0, 0, 0), (0, 1, 0), (0, 1, 1), (0, 0, 1)])
    assert path_length(square) == 4.0
    assert path_length(PolyPath(((0, 0, 0), (0, 0, 2)))) == 2.0


def test_polypath_invariants():
    with pytest.raises(PathError, match="distinct"):
        PolyPath(((0, 0, 0), (0, 0, 0), (1, 0, 0)))
    with pytest.raises(PathError, match="closed path"):
        PolyPath(((0, 0, 0), (1, 0, 0)), closed=True)
    with pytest.raises(PathError):
        PolyPath(((0, 0, 0),))


def test_path_file_roundtrip(tmp_path):
    loop = PolyPath.loop([(0.1, 0.2, 0.3), (1.0, 0.2, 0.3), (1.0, 0.2, -0.3)])
    f = tmp_path / "p.txt"
    write_path(loop, f)
    assert read_path(f) == loop


def test_read_path_closes_and_rejects(tmp_path):
    f = tmp_path / "p.txt"
    f.write_text("# comment\n0 0 0\n1 0 0\n1 1 0\nclosed\n")
    loop = read_path(f)
    assert loop.closed and loop.vertices[0] == loop.vertices[-1]
    f.write_text("0 0\n")
    with pytest.raises(PathError, match="line 1"):
        read_path(f)
    f.write_text("0 0 0\n1 0 0\nclosed\n2 0 0\n")
    with pytest.raises(PathError):
        read_path(f)


def test_phase_breakdown_csv_and_negation():
    pb = PhaseBreakdown(0.1, 0.2, 0.30000000000000004, 1e-14)
    assert pb.csv() == "theta_e,theta_m,theta_total,quad_error\n0.1,0.2,0.30000000000000004,1e-14\n"
    assert (-pb).theta_total == -pb.theta_total
