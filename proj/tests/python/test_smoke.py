"""Smoke tests for the python module: wiring only, depth lives in C++."""

import math

import pytest

import spikeport as sp


def test_amplifier_algebra():
    assert sp.negative_feedback_slope(10.0, 0.2) == pytest.approx(10.0 / 3.0)
    lo, hi = sp.bistable_range(10.0, 0.3)
    assert lo == pytest.approx(1.0 / 10.0 - 0.3)
    assert hi == pytest.approx(0.0)
    sols = sp.amplifier_characteristic(10.0, 0.3, True, -0.1)
    assert len(sols) == 3


def test_simulate_and_classify():
    fhn = sp.build_fhn(C=1.0, L=100.0, R=1.0, k=1.0)
    dt, horizon = 0.01, 1000.0
    n = round(horizon / dt)
    rep = sp.simulate(fhn, [0.2] * n, dt=dt, horizon=horizon)
    v = rep["states"]["V"]
    assert len(v) == n
    out = sp.classify(v, dt, threshold=0.5, refractory=5.0)
    assert out["label"] == "Spiking"
    spikes = sp.detect_spikes(v, dt, threshold=0.5, refractory=5.0)
    assert len(spikes) == out["n_spikes"] >= 3


def test_burster_and_network():
    burster = sp.build_burster()
    dt, horizon = 0.01, 400.0
    n = round(horizon / dt)
    rep = sp.simulate(burster, [sp.default_burster_input()] * n, dt, horizon)
    out = sp.classify(rep["states"]["V"], dt, threshold=0.0, refractory=0.3)
    assert out["label"] == "Bursting"

    net, ia, ib = sp.build_default_hco()
    assert net.n_nodes == 2
    nrep = sp.simulate_network(net, [[ia] * n, [ib] * n], dt, horizon)
    assert "V1" in nrep["states"] and "V2" in nrep["states"]


def test_dc_solve():
    dt, horizon = 0.01, 20.0
    n = round(horizon / dt)
    rep = sp.dc_solve_fhn(1.0, 100.0, 1.0, 1.0, [-0.5] * n, dt)
    assert rep["converged"]


def test_estimation_round_trip():
    burster = sp.build_burster()
    dt, horizon = 0.005, 120.0
    n = round(horizon / dt)
    drive = [sp.default_burster_input()] * n
    rep = sp.simulate(burster, drive, dt, horizon)
    theta = sp.estimate_conductances(
        burster, ["fast_mixed", "slow_positive"], drive, rep["states"]["V"],
        dt)
    assert theta[0] == pytest.approx(4.0, rel=1e-2)
    assert theta[1] == pytest.approx(10.0, rel=1e-2)
    assert sp.output_feedback_gain_bound(burster) > 0.0


def test_motor_demo():
    rep = sp.motor_demo(0.05, dt=0.002, horizon=120.0)
    assert rep["stall_baseline"] and not rep["stall_spiking"]


def test_run_config(tmp_path):
    doc = (
        '{"experiment": "simulate",'
        ' "circuit": {"builder": "fhn"},'
        ' "input": {"kind": "constant", "value": 0.2},'
        ' "solver": {"dt": 0.01, "horizon": 1000.0},'
        ' "analysis": {"threshold": 0.5, "refractory": 5.0},'
        f' "outputs": {{"dir": "{tmp_path}"}}}}'
    )
    out = sp.run_config(doc)
    assert "node0_class=Spiking" in out["summary"]
    assert any(f.endswith("trajectory.csv") for f in out["files"])
    with pytest.raises(Exception):
        sp.validate_config('{"bogus": 1}')
    assert '"experiment": "simulate"' in sp.validate_config("{}")


def test_phase_difference():
    a = [0.0, 10.0, 20.0, 30.0]
    b = [5.0, 15.0, 25.0, 35.0]
    phase = sp.phase_difference(a, b, horizon=40.0, period_estimate=10.0)
    assert phase == pytest.approx(math.pi, abs=1e-6)
