import math

import numpy as np
import pytest

import dampkde


def test_simulate_is_reproducible_and_estimates_match_the_stationary_law():
    a = dampkde.simulate(T=20.0, seed=7)
    b = dampkde.simulate(T=20.0, seed=7)
    assert np.array_equal(a["x"], b["x"])
    assert a["x"].shape == (20001,)
    assert a["db"].shape == (20000,)
    long = dampkde.simulate(T=400.0, seed=3, stationary_start=True)
    est = dampkde.estimate(long["x"], long["y"], long["dt"], [(0.0, 0.0)], 0.3, 0.3)
    truth = 1.0 / (2.0 * math.pi)
    assert abs(est[0] - truth) < 0.35 * truth


def test_kernel_and_bandwidths():
    assert np.allclose(dampkde.kernel(1, np.array([-0.5, 0.0, 2.0])), [0.5, 0.5, 0.0])
    b = dampkde.select_bandwidths(1.0, 1.0, False, 100.0)
    assert b["regime"] == 2
    assert b["h1"] == pytest.approx(100.0 ** -0.4)


def test_inverse_beta_recovers_constant_damping():
    beta = dampkde.inverse_beta("gaussian-eta", eta=0.7, xs=np.linspace(-1, 1, 3), ys=np.linspace(-1, 1, 5))
    assert beta.shape == (3, 5)
    assert np.allclose(beta, 0.7, atol=1e-8)
    assert np.allclose(dampkde.inverse_beta("paper-sim", xs=[0.5], ys=[1.0]), 2.0, atol=1e-8)


def test_variance_sweep_report():
    r = dampkde.variance_sweep(T=5.0, n_rep=4, h1_grid=[0.2], h2_grid=[0.3, 0.4])
    assert r["rows"].shape == (2, len(r["columns"]))
    assert r["stem"] == "variance-sweep_paper-sim_T5_seed1"
    assert r["metadata"]["n_rep"] == 4


def test_prior_and_errors():
    p = dampkde.Prior(h1=0.25, h2=0.5, M=100.0)
    assert p.checks()["mass"] == pytest.approx(1.0, abs=1e-8)
    x0, y0 = 0.0, 1.5
    assert p.pi_tilde(x0, y0) - p.pi0(x0, y0) == pytest.approx(1.0 / 100.0, rel=1e-9)
    assert p.delta(5.0, 5.0) == 0.0
    with pytest.raises(dampkde.DampkdeError) as info:
        dampkde.Prior(h1=0.25, h2=0.5, M=-1.0)
    assert info.value.args[1] == "config"
    prior, cal = dampkde.calibrate_prior(1.0, 1.0, 20.0)
    assert cal["case"] == 2
    g = prior.girsanov(T=2.0, n_rep=5)
    assert g["log_ratio"].shape == (5,)
