import json

import pytest

from conecap import cli
from conecap.config import ConfigError, expand_sweep, parse_config


def _write(tmp_path, obj, name="sc.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return p


def test_defaults():
    sc = parse_config('{"kind": "capacity"}')
    assert sc.cone.n == 3 and sc.cone.theta0_deg == 90
    assert sc.grid.m_theta == 128 and sc.grid.m_s == 256
    assert sc.tolerances.relative == 1e-2


@pytest.mark.parametrize("text,where", [
    ('{"kind": "capacity", "cone": {"n": 3, "angle": 60}}', "cone.angle"),
    ('{"kind": "capacity", "cone": {"theta0_deg": 120}}', "cone.theta0_deg"),
    ('{"kind": "capacity", "surface": {"type": "perturbed_cap", "eps": 0.7}}', "surface.eps"),
    ('{"kind": "capacity", "surface": {"type": "perturbed_cap", "mode": 3}}', "surface.mode"),
    ('{"kind": "capacity", "grid": {"m_theta": 31}}', "grid.m_theta"),
    ('{"kind": "capacity", "grid": {"m_s": "many"}}', "grid.m_s"),
    ('{"kind": "penrose", "cone": {"theta0_deg": 60}}', "cone.theta0_deg"),
    ('{"kind": "sweep"}', "sweep.vary"),
    ('{"kind": "sweep", "sweep": {"vary": {"grid.nope": [1]}}}', "sweep.vary.grid.nope"),
    ('{"kind": "teleport"}', "kind"),
    ('{"cone": {}}', "kind"),
    ('{"kind": "capacity",\n "cone": {"n": 3,}}', "line 2"),
])
def test_config_errors_name_the_field(text, where):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert str(exc.value).startswith(where)


def test_expand_sweep_cross_product():
    sc = parse_config(json.dumps({"kind": "sweep", "sweep": {
        "kind": "capacity", "vary": {"surface.eps": [0.0, 0.1], "cone.n": [3, 4, 5]}}}))
    pts = expand_sweep(sc)
    assert len(pts) == 6
    assert {p.cone.n for _, p in pts} == {3, 4, 5}
    assert all(p.kind == "capacity" for _, p in pts)


def test_grid_scale():
    sc = parse_config('{"kind": "capacity", "grid": {"m_theta": 16, "m_s": 32}}').scaled(2)
    assert (sc.grid.m_theta, sc.grid.m_s) == (32, 64)


def test_cap_solve_end_to_end_is_deterministic(tmp_path):
    cfg = _write(tmp_path, {"kind": "capacity", "cone": {"n": 3, "theta0_deg": 60},
                            "grid": {"m_theta": 32, "m_s": 64}, "output": "cap", "write_field_csv": True})
    outs = []
    for d in ("a", "b"):
        assert cli.main(["cap-solve", str(cfg), "--out-dir", str(tmp_path / d), "--no-timestamp"]) == 0
        outs.append((tmp_path / d / "cap.json").read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["verdicts"]["capacity_vs_mean_curvature"] == "equality within tol"
    assert doc["result"]["cap_extrapolated"] == pytest.approx(1.0, rel=1e-3)
    assert (tmp_path / "a" / "cap_field.csv").exists()


def test_imcf_run_writes_trace(tmp_path):
    cfg = _write(tmp_path, {"kind": "imcf", "cone": {"theta0_deg": 60},
                            "surface": {"type": "perturbed_cap", "eps": 0.1},
                            "grid": {"m_theta": 32}, "flow": {"t_end": 0.5, "dt": 5e-3}, "output": "fl"})
    assert cli.main(["imcf-run", str(cfg), "--out-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "fl.json").read_text())
    assert doc["verdicts"] == {"h_monotone": "holds", "exponential_bound": "holds", "h_vs_cone_limit": "holds"}
    assert "generated_at" in doc
    assert (tmp_path / "fl_trace.csv").read_text().startswith("t,area,I,h")


def test_penrose_check_schwarzschild(tmp_path):
    cfg = _write(tmp_path, {"kind": "penrose", "schwarzschild": {"mass": 1.0},
                            "grid": {"m_theta": 32, "m_s": 64}, "output": "pm"})
    assert cli.main(["penrose-check", str(cfg), "--out-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "pm.json").read_text())
    assert doc["verdicts"]["mass_vs_capacity"] == "equality within tol"
    assert doc["result"]["flag_in_M"] is True


def test_sweep_writes_csv(tmp_path):
    cfg = _write(tmp_path, {"kind": "sweep", "grid": {"m_theta": 16, "m_s": 32}, "output": "sw",
                            "sweep": {"kind": "capacity", "workers": 2,
                                      "vary": {"surface.r": [0.5, 1.0], "cone.n": [3, 4]}}})
    assert cli.main(["sweep", str(cfg), "--out-dir", str(tmp_path), "--no-timestamp"]) == 0
    rows = (tmp_path / "sw_sweep.csv").read_text().splitlines()
    assert rows[0].startswith("param_cone.n,param_surface.r,")
    assert len(rows) == 5


def test_exit_codes(tmp_path, monkeypatch):
    bad = _write(tmp_path, '{"kind": "capacity", "cone": {"theta0_deg": 120}}', "bad.json")
    assert cli.main(["cap-solve", str(bad)]) == 2
    assert cli.main(["cap-solve", str(tmp_path / "missing.json")]) == 2
    cap = _write(tmp_path, {"kind": "capacity", "grid": {"m_theta": 16, "m_s": 32}}, "cap.json")
    assert cli.main(["imcf-run", str(cap)]) == 2  # verb/kind mismatch
    assert cli.main(["cap-solve", str(cap), "--grid-scale", "0"]) == 2
    neg = _write(tmp_path, {"kind": "imcf", "cone": {"theta0_deg": 60}, "grid": {"m_theta": 64},
                            "surface": {"type": "perturbed_cap", "eps": 0.2, "mode": 4}}, "neg.json")
    assert cli.main(["imcf-run", str(neg), "--out-dir", str(tmp_path)]) == 3
    monkeypatch.setitem(cli.RUNNERS, "capacity", lambda sc: ({}, {"verdicts": {"capacity_vs_mean_curvature": "violated"}}))
    assert cli.main(["cap-solve", str(cap), "--out-dir", str(tmp_path)]) == 1
