import math

import pytest

import bweb


def test_geometry_closed_forms():
    t1 = math.tanh(1.0)
    assert bweb.phi(1, 1) == pytest.approx(t1 / 2)
    assert bweb.psi(math.inf) == 1.0
    assert bweb.rho((0, 0), (1, 0)) == pytest.approx(t1)
    zero = bweb.Path.constant(0.0, 0.0)
    assert bweb.path_metric(zero, bweb.Path.constant(1.0, 0.0)) == pytest.approx(t1, abs=1e-9)
    assert bweb.path_metric(zero, bweb.Path.constant(0.0, 1.0)) == pytest.approx(t1, abs=1e-9)
    assert bweb.hausdorff([zero], [zero]) == 0.0


def test_path_evaluation_and_errors():
    p = bweb.Path.polygonal([(0, 0), (1, 2)])
    assert p(0.5) == pytest.approx(1.0)
    assert p.knots == [(0.0, 0.0), (1.0, 2.0)]
    assert bweb.Path.sentinel(+1, 0.0)(3.0) == math.inf
    with pytest.raises(bweb.ConfigError):
        bweb.Path.polygonal([(1, 0), (0, 1)])


def test_lattice_simulation_and_counting():
    system = {"kind": "discrete_parity", "delta": 0.1, "seed": 4}
    starts = [(i, 0) for i in range(-10, 11, 2)]
    paths = bweb.simulate_lattice(system, starts, 100)
    assert 1 <= len(paths) <= len(starts)
    assert paths == bweb.simulate_lattice(system, starts, 100)
    c = bweb.count(paths, t0=0.0, t=1.0, a=-1.0, b=1.0)
    assert c["eta"] == len(c["n"])
    assert c["eta_hat"] == c["eta"] - 1


def test_window_overflow():
    system = {"kind": "discrete_parity", "window": {"x": [-2, 2], "t": [0, 200]}}
    with pytest.raises(bweb.WindowOverflow):
        bweb.simulate_lattice(system, [(0, 0)], 200)


def test_skeleton_and_theta():
    paths, records = bweb.sample_skeleton([(0.0, 0.0), (0.0, 0.0)], step=1e-3)
    assert len(paths) == 2
    assert records == [(0, 1, 0.0)]
    assert bweb.theta(1.0, 1.0) == pytest.approx(math.erf(0.5))
    assert bweb.bridge_meet_prob(1.0, 1.0, 1.0) == pytest.approx(math.exp(-1))


def test_run_check():
    assert "est_eta_mean" in bweb.check_names()
    rows = bweb.run_check("check_metric_properties", {"replicas": 50}, seed=3)
    assert len(rows) == 7
    assert all(r["verdict"] == "pass" for r in rows)
    with pytest.raises(bweb.ConfigError):
        bweb.run_check("no_such_check")
