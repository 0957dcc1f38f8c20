import math

import numpy as np
import pytest

import dodewalk


def test_weights_sum_and_markov_mass():
    w = dodewalk.weights(0.9, 100)
    assert w.shape == (101,)
    assert math.isclose(w.sum(), 1.0, rel_tol=1e-12)
    assert math.isclose(w[-1], 2 - 2 ** 0.1, rel_tol=1e-14)
    assert math.isclose(dodewalk.weights(0.7, 5, "gl")[-1], 0.7)


def test_kernel_brownian():
    k = dodewalk.kernel([2.0], [9e-12], K=8)
    assert math.isclose(k["tau"], 1e-6, rel_tol=1e-12)
    assert k["offsets"].shape == (4, 2)
    np.testing.assert_allclose(k["prob"], 0.25)


def test_lattice_sum_brackets_zeta():
    s = dodewalk.lattice_sum(1.0, 1, 100000)
    assert s["value"] <= math.pi ** 2 / 3 <= s["value"] + s["tail_bound"]


def test_walk_and_ensemble():
    cfg = dict(dodewalk.preset("plot1-left"), T_s=1e-4)
    w = dodewalk.walk(cfg)
    assert w["positions_nm"].shape == (101, 2)
    assert w["avg_jump_nm"] == 6.0
    e = dodewalk.ensemble(cfg, threads=2, ensemble=200, K=16)
    assert e["final_positions"].shape == (200, 2)


def test_fd_two_steps():
    d = dodewalk.fd("plot1-left", n_steps=2, J=4, T_s=None)
    u = d["density"]
    assert u.shape == (9, 9)
    assert u[4, 4] == 0.25
    assert u[6, 4] == 0.0625


def test_errors_map_to_python():
    with pytest.raises(dodewalk.ConfigError):
        dodewalk.weights(0.0, 3)
    with pytest.raises(dodewalk.StabilityError):
        dodewalk.resolve("plot1-left", p0=None, tau_s=2e-6)


def test_run_compare(tmp_path):
    code, report = dodewalk.run("compare", "compare-plot1-left", tmp_path, ensemble=2000, J=32, n_steps=20,
                                tv_tolerance=1.0)
    assert code == 0
    assert (tmp_path / "manifest.json").exists()
    assert 0.0 <= report["tv_distance"] <= 1.0
