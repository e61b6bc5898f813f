import json
import math

import numpy as np
import pytest

import dplab


def test_exponents_reference():
    e = dplab.ExponentSet(2, 2.0, 2.5)
    assert e.tilde_p == pytest.approx(3.0)
    assert e.theta_embedding == pytest.approx(0.4)
    assert e.vartheta == pytest.approx(0.5)
    assert e.lambda_ == pytest.approx(512.0)
    assert e.blowup_exponent() == pytest.approx(-5.0)
    assert e.level_magnitude(0.5, 1.0, 2.0) == pytest.approx(64.0)
    assert dplab.compute_theta(2, 2.0, 2.5) == pytest.approx(0.4)


def test_invalid_parameters_raise():
    with pytest.raises(dplab.Error):
        dplab.validate_params(2, 2.0, 3.0)
    with pytest.raises(dplab.Error):
        dplab.ExponentSet(1, 2.0, 2.5)


def test_generate_field_shape_and_determinism():
    g = dplab.Grid(2, 9, 5)
    a = dplab.generate_field(g, seed=3)
    b = dplab.generate_field(g, seed=3)
    assert a.shape == (5, 9, 9)
    assert np.array_equal(a, b)


def test_solve_respects_max_principle():
    g = dplab.Grid(2, 17, 9, t0=0.1, time_length=0.1)
    x = np.linspace(-1.0, 1.0, 17)
    u0 = np.outer(np.cos(0.5 * np.pi * x), np.cos(0.5 * np.pi * x))
    u, trace = dplab.solve(g, u0.ravel(), 2.0, 2.5, a=1.0)
    assert u.shape == (9, 17, 17)
    assert u.min() >= 0.0 and u.max() <= u0.max()
    assert len(trace["steps"]) == 8


def test_embedding_scale_invariance():
    g = dplab.Grid(2, 17, 9)
    f = dplab.generate_field(g, seed=1)
    r1 = dplab.embedding_sides(g, f, 2, 2.0, 2.5)
    r2 = dplab.embedding_sides(g, 1e3 * f, 2, 2.0, 2.5)
    assert r1["empirical_c"] == pytest.approx(r2["empirical_c"], rel=1e-10)


def test_supbound_and_degiorgi():
    g = dplab.Grid(2, 17, 9, t0=0.25, time_length=0.25)
    u = 0.01 * dplab.generate_field(g, seed=2)
    e = dplab.ExponentSet(2, 2.0, 2.5)
    s = dplab.supbound_sides(g, u, e, 0.5, 0.5, "proof")
    assert math.isfinite(s["empirical_c"])
    tr = dplab.degiorgi_trace(g, u, e, 0.5, 0.5)
    assert tr["smallness"] <= 1.0
    assert all(tr["decay_flags"])


def test_fast_convergence_and_fit():
    lam = 512.0
    y0, k = 0.37, 1.7
    c = 1.0 / (lam * k**1.5 * y0**0.5)
    r = dplab.fast_convergence_check(y0, c, 8.0, 0.5, k)
    assert r["max_equality_margin"] <= 1e-9
    pts = [(s, 3.0 * (1.0 - s) ** -5.0) for s in (0.1, 0.3, 0.5, 0.7)]
    assert dplab.fit_blowup_exponent(pts) == pytest.approx(-5.0, abs=1e-8)


def test_run_experiment_reproducible(tmp_path):
    cfg = json.dumps({"experiment": "caccioppoli", "ladder": [17, 33], "seed": 4})
    a = dplab.run_experiment(cfg, str(tmp_path / "a"))
    b = dplab.run_experiment(cfg)
    assert a["ok"], a["failures"]
    assert a["csv"] == b["csv"]
    assert (tmp_path / "a" / "results.csv").read_text() == a["csv"]
