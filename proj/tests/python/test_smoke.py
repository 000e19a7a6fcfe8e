"""Smoke tests for the Python bindings: registry, construction, pointwise
evaluation, Eulerian fields, verification verdicts, truncation, frame
changes, and error mapping."""

import json
import math

import pytest

lagrflow = pytest.importorskip("lagrflow")


def quick(cfg):
    cfg.grid_n = 3
    cfg.grid_t = 6
    return cfg


def test_registry_lists_all_families():
    infos = lagrflow.registry()
    assert len(infos) == 15
    ids = [f.id for f in infos]
    assert len(set(ids)) == 15
    assert "m3-kirchhoff" in ids
    assert all(3 <= f.m <= 6 for f in infos)
    assert all(f.kind in ("closed-form", "ode") for f in infos)


def test_catalog_solution_evaluates():
    sol = lagrflow.build_solution(quick(lagrflow.catalog_config("m4")))
    z = [0.3, -0.2, 0.5]
    t = 0.5 * (sol.t0 + sol.t_end)
    x = sol.phi(z, t)
    assert len(x) == 3 and all(isinstance(c, float) for c in x)
    assert sol.alpha(z, t) > 0.0
    jac = sol.jacobian(z, t)
    assert len(jac) == 3 and len(jac[0]) == 3
    h = sol.invariant_two_form(z, t)
    closed = sol.closed_invariant(z)
    assert closed is not None
    assert max(abs(a - b) for a, b in zip(h, closed)) <= 1e-8


def test_rigid_rotation_velocity_field():
    cfg = lagrflow.FamilyConfig()
    cfg.family = "m3-kirchhoff"
    cfg.constants = {"c12": 1.0, "c13": 0.0, "c23": 0.0}
    cfg.functions = {"b11": "1", "b22": "1", "w1": "0", "w2": "0", "w3": "1"}
    cfg.t1 = 2.0
    sol = lagrflow.build_solution(quick(cfg))
    x = [0.4, -0.3, 0.6]
    u = sol.eulerian_velocity(x, 1.2)
    spin = [-0.5 * x[1], 0.5 * x[0], 0.0]
    assert max(abs(a - b) for a, b in zip(u, spin)) <= 1e-9
    zeta = sol.eulerian_vorticity(x, 1.2)
    assert max(abs(a - b) for a, b in zip(zeta, [0.0, 0.0, 1.0])) <= 1e-9


def test_inversion_round_trip():
    sol = lagrflow.build_solution(quick(lagrflow.catalog_config("m5-elliptic")))
    z = [0.25, -0.4, 0.1]
    t = 0.6 * sol.t_end
    x = sol.phi(z, t)
    zr = sol.invert(x, t)
    back = sol.phi(zr, t)
    assert math.dist(back, x) <= 1e-9


def test_verification_report_passes():
    sol = lagrflow.build_solution(quick(lagrflow.catalog_config("m5-hyperbolic")))
    rep = sol.verify(fd_checks=False)
    assert rep.passed
    assert rep.family == "m5-hyperbolic"
    names = [c.name for c in rep.checks]
    assert "alpha-constancy" in names and "h-constancy" in names
    parsed = json.loads(rep.to_json())
    assert parsed["pass"] is True


def test_negative_control_is_detected():
    cfg = quick(lagrflow.catalog_config("m4"))
    cfg.override_declared("q12", 1.1 * cfg.constants["c12"])
    rep = lagrflow.build_solution(cfg).verify(fd_checks=False)
    assert not rep.passed
    assert rep.find("declared-pairs").residual > 1e-3


def test_truncation_is_reported():
    sol = lagrflow.build_solution(lagrflow.catalog_config("m6-elliptic-keq1"))
    assert sol.truncated
    assert sol.truncation_reason == "axis-collapse"
    assert sol.t0 < sol.t_end < sol.t1


def test_gauge_transform_keeps_the_map():
    cfg = lagrflow.catalog_config("m3-kirchhoff")
    c = cfg.constants
    sol = lagrflow.build_solution(quick(cfg))
    h = [
        [1.0, 0.0, 0.0],
        [-c["c13"] / c["c23"], 1.0, 0.0],
        [c["c12"] / c["c23"], 0.0, 1.0],
    ]
    gt = sol.gauge(h)
    z, t = [0.3, 0.7, -0.2], 0.4
    assert math.dist(sol.phi(z, t), gt.phi(z, t)) <= 1e-12
    assert abs(gt.pair_coefficient(t, 1, 2)) <= 1e-8


def test_minor_identities_vanish():
    cols = [[1.0, 2.0, -3.0], [0.5, -1.0, 2.0], [4.0, 0.0, 1.0],
            [-2.0, 1.5, 0.5], [3.0, -0.5, -1.0], [0.25, 2.5, 1.75]]
    r = lagrflow.minor_identity_residuals(cols)
    scale = (1.0 + r["scale"]) ** 2
    assert abs(r["three_two"]) / scale <= 1e-12
    assert abs(r["four_pair"]) / scale <= 1e-12
    assert abs(r["compound"]) / (scale * (1.0 + r["scale"])) <= 1e-12


def test_config_json_round_trip():
    cfg = lagrflow.catalog_config("m6-parabolic-growth")
    again = lagrflow.FamilyConfig.from_json(cfg.to_json())
    assert again.family == cfg.family
    assert again.constants == cfg.constants
    assert again.functions == cfg.functions
    assert (again.t0, again.t1) == (cfg.t0, cfg.t1)


def test_errors_map_to_python_exceptions():
    with pytest.raises(lagrflow.ConfigError):
        lagrflow.catalog_config("no-such-family")
    assert issubclass(lagrflow.ConfigError, ValueError)
    cfg = lagrflow.catalog_config("m4")
    cfg.set_function("f", "z1 + ")
    with pytest.raises(ValueError):
        lagrflow.build_solution(cfg)
