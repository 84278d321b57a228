import math

import numpy as np
import pytest

import vehopt as v


@pytest.fixture
def params():
    return v.HarvesterParams()


def test_lyapunov_and_spectral_agree(params):
    m = v.build_closed_loop(params, v.ControlGains(0.1, 900.0))
    jl = v.mean_power(m, params.W)
    js = v.harvested_power_spectral(m, params.W).J
    assert jl == pytest.approx(3.2884062568635187e-07, rel=1e-10)
    assert abs(jl - js) <= 1e-6 * jl


def test_matrices_are_numpy(params):
    m = v.build_closed_loop(params, v.ControlGains(0.1, 900.0))
    A = np.asarray(m.A)
    assert A.shape == (5, 5)
    assert A[3, 2] == pytest.approx(-1.1)
    assert A[4, 3] == pytest.approx(1.0 / 901.0)
    P = v.stationary_covariance(m, 1.0)
    assert np.allclose(P, P.T)
    C = np.asarray(m.C).reshape(-1)
    assert C @ P @ C == pytest.approx(v.mean_power(m, 1.0), rel=1e-12)


def test_infeasible_gains_raise(params):
    with pytest.raises(v.InfeasibleGainsError, match="K_e > -1"):
        v.build_closed_loop(params, v.ControlGains(0.1, -2.0))
    assert issubclass(v.InfeasibleGainsError, v.VehError)
    assert not v.validate_gains(v.ControlGains(0.0, 1.0))


def test_simulation_is_reproducible(params):
    m = v.build_closed_loop(params, v.ControlGains(0.3, 925.0))
    a = v.simulate(m, 1.0, 0.01, 1000, 7)
    b = v.simulate(m, 1.0, 0.01, 1000, 7)
    assert a.shape == (1001, 5)
    assert np.array_equal(a, b)
    assert np.all(a[0] == 0.0)
    o = v.SimOptions()
    o.n_steps = 200000
    est = v.simulate_power(m, 1.0, o)
    assert est.std_error > 0.0
    assert abs(est.mean - v.mean_power(m, 1.0)) <= 5.0 * est.std_error


def test_sweep_and_optimizer(params):
    r = v.sweep(params, [0.1, 0.3], v.logspace(1.0, 1e4, 5))
    J = np.asarray(r.J)
    assert J.shape == (2, 5)
    assert np.all(np.isfinite(J))
    assert r.argmax() == tuple(int(k) for k in np.unravel_index(np.argmax(J), J.shape))
    res = v.maximize_gains(params, v.ControlGains(0.3, 925.0))
    assert v.validate_gains(res.gains_star)
    assert res.J_star > J.max()


def test_cli_entry_point(tmp_path):
    code, out, err = v.run_cli(["evaluate", "--out", str(tmp_path)])
    assert code == 0, err
    assert "J_lyapunov" in out
    assert (tmp_path / "evaluate.json").exists()
    code, _, err = v.run_cli(["evaluate", "--set", "gains.K_e=-2"])
    assert code == 2
    assert "K_e > -1" in err


def test_spectrum_curve_peaks(params):
    m = v.build_closed_loop(params, v.ControlGains(0.1, 900.0))
    w = np.linspace(0.01, 8.0, 4000)
    g = np.asarray(v.spectrum_curve(m, w))
    assert g.shape == w.shape
    assert w[np.argmax(g)] == pytest.approx(math.sqrt(1.1), rel=0.05) or \
        w[np.argmax(g)] == pytest.approx(5.0, rel=0.05)
