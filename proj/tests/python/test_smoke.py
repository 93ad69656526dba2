import json
import math

import numpy as np
import pytest

import nehari


def reference(m=2048):
    return nehari.Problem(nehari.ProblemSpec(nehari.ModelGeometry.euclidean_ball(8)), m)


def test_integral_closed_form():
    assert nehari.integral_I(3.0, 0.0) == pytest.approx(0.5, rel=1e-14)
    assert nehari.integral_I(3.0, 1.0) == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(nehari.DomainError):
        nehari.integral_I(2.0, 1.0)


def test_fibering_worked_example():
    r = nehari.fibering_scalar(1.0, 0.3, 1.0, 1.5, 4.0)
    assert r.feasible
    assert r.t0 == pytest.approx(math.sqrt(0.2), abs=1e-12)
    assert r.t_plus < r.t0 < r.t_minus


def test_spec_and_geometry():
    spec = nehari.ProblemSpec(nehari.ModelGeometry.round_sphere(8, 1.0))
    assert spec.critical_exponent == pytest.approx(4.0)
    assert spec.geom.scalar_curvature() == 56.0
    with pytest.raises(nehari.ConfigurationError):
        nehari.ModelGeometry.euclidean_ball(4)


def test_two_solutions():
    p = reference()
    c = nehari.estimate_constants(p)
    assert c.coercive
    both = nehari.solve_both(p.with_lambda(0.1 * c.lambda0))
    assert both["converged"] and both["ordering"]
    assert both["plus"]["J_value"] < 0.0 < both["minus"]["J_value"]
    u = both["minus"]["u"]
    assert isinstance(u, np.ndarray) and u.shape == p.nodes.shape


def test_energy_dual_matches_difference_quotient():
    p = reference(256).with_lambda(0.05)
    x = p.nodes
    u = (1 - x**2) ** 2 * (1 + x)
    v = (1 - x**2) ** 2 * np.cos(3 * x)
    h = 1e-6
    fd = (p.energy(u + h * v) - p.energy(u - h * v)) / (2 * h)
    assert fd == pytest.approx(p.energy_dual(u) @ v, rel=1e-6)


def test_run_config_rejects_empty(tmp_path):
    code, message, files = nehari.run_config("{}", out_dir=str(tmp_path))
    assert code == 2
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["error"]["kind"] == "validation"
