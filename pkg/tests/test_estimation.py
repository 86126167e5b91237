import math

import numpy as np
import pytest

from cavitypairs import Axis, CavityMode, ProcessConfig, Trace
from cavitypairs.cw import cross_correlation_cw, flux_triply_resonant
from cavitypairs.errors import DegenerateData, NoConvergence, ShallowDip
from cavitypairs.estimation import (SweepRecord, double_exponential, estimate_mismatch, fit_double_exponential,
                                    fit_lorentzian, read_sweep_csv, synthetic_sweep, temperature_to_mismatch,
                                    write_sweep_csv)
from cavitypairs.lm import levenberg_marquardt
from cavitypairs.pump import reflected_power_ratio

from conftest import T_SI, TWO_PI

GP = TWO_PI * 28.8e6
GSI = 1.0 / T_SI


def dip_trace(n=200, noise=0.0, rng=None):
    ax = Axis.from_values(np.linspace(-4 * GP, 4 * GP, n))
    y = reflected_power_ratio(0.5, GP, ax.values)
    if noise:
        y = y * (1 + noise * rng.standard_normal(n))
    return Trace(ax, y)


def sweep_config(delta0):
    return ProcessConfig.symmetric(GSI, delta0, pump=CavityMode.from_linewidth(GP, 0.5)).with_power_ratio(0.01)


DP = np.linspace(-TWO_PI * 50e6, TWO_PI * 50e6, 201)


def test_dip_fit_recovers_pump_linewidth():
    fit = fit_lorentzian(dip_trace(), inverted=True)
    assert fit.converged
    assert fit["fwhm"] == pytest.approx(GP, rel=1e-6)
    assert fit["center"] == pytest.approx(0.0, abs=1e-6 * GP)
    assert fit["offset"] == pytest.approx(1.0, rel=1e-9)


def test_dip_fit_with_noise():
    rng = np.random.default_rng(11)
    w = [fit_lorentzian(dip_trace(noise=0.05, rng=rng), inverted=True)["fwhm"] for _ in range(100)]
    assert abs(np.median(w) / GP - 1) < 0.02


def test_flat_trace_is_degenerate():
    ax = Axis(0.0, 1.0, 50)
    with pytest.raises(DegenerateData):
        fit_lorentzian(Trace(ax, np.full(50, 3.0)))
    with pytest.raises(DegenerateData):
        fit_lorentzian(Trace(Axis(0.0, 1.0, 5), np.arange(5.0)))


def test_symmetric_decay_fit():
    ax = Axis(-250e-9, 0.5e-9, 1001)
    y = 40.0 * cross_correlation_cw(ax.values, GSI, GSI) + 2.0
    fit = fit_double_exponential(Trace(ax, y), symmetric=True)
    assert fit.converged
    assert fit["decay_time_left"] == pytest.approx(T_SI, rel=1e-6)
    assert fit["background"] == pytest.approx(2.0, rel=1e-6)


def test_asymmetric_decay_fit():
    gs, gi = 2 * GSI, GSI
    ax = Axis(-300e-9, 0.5e-9, 1201)
    y = double_exponential(ax.values, 3e-9, 1 / gs, 1 / gi, 10.0, 0.5)
    fit = fit_double_exponential(Trace(ax, y))
    assert fit["decay_time_left"] == pytest.approx(1 / gs, rel=1e-2)
    assert fit["decay_time_right"] == pytest.approx(1 / gi, rel=1e-2)
    assert fit["peak_position"] == pytest.approx(3e-9, abs=1e-11)


def test_poisson_histogram_decay_fit():
    rng = np.random.default_rng(5)
    ax = Axis(-150e-9, 1e-9, 301)
    shape = cross_correlation_cw(ax.values, GSI, GSI) + 0.02
    mean = 1e4 * shape / shape.sum()
    est = [fit_double_exponential(Trace(ax, rng.poisson(mean).astype(float)), symmetric=True)["decay_time_left"]
           for _ in range(40)]
    assert abs(np.median(est) / T_SI - 1) < 0.05


def test_optimizer_cost_never_increases():
    fit = fit_lorentzian(dip_trace(noise=0.05, rng=np.random.default_rng(2)), inverted=True)
    h = np.array(fit.history)
    assert np.all(np.diff(h) <= 0)


def test_optimizer_reports_stall():
    # a residual that cannot be reduced below its floor and has a non-vanishing gradient everywhere
    res = lambda p: np.array([math.exp(p[0]), 1.0])
    jac = lambda p: np.array([[math.exp(p[0])], [0.0]])
    out = levenberg_marquardt(res, jac, [0.0], max_iter=5)
    assert not out.converged


@pytest.mark.parametrize("mhz", [0.0, -10.0])
def test_mismatch_recovered_from_sweep(mhz):
    d0 = TWO_PI * mhz * 1e6
    fit = estimate_mismatch(synthetic_sweep(sweep_config(d0), DP), GSI)
    assert fit["delta0"] == pytest.approx(d0, abs=max(0.01 * abs(d0), 1e-6 * GSI))
    assert fit["fwhm_check"] == pytest.approx(2 * GSI, rel=1e-6)


def test_zero_mismatch_sweep_is_symmetric():
    sw = synthetic_sweep(sweep_config(0.0), DP)
    c = np.asarray(sw.counts.values)
    assert np.allclose(c, c[::-1], rtol=1e-12)


def test_lattice_with_noise():
    for mhz in (5.0, -20.0):
        d0 = TWO_PI * mhz * 1e6
        ss = np.random.SeedSequence(9).spawn(50)
        est = [estimate_mismatch(synthetic_sweep(sweep_config(d0), DP, 0.05, s), GSI)["delta0"] for s in ss]
        assert abs(np.median(est) / d0 - 1) < 0.1


def test_shallow_dip_rejected():
    cfg = ProcessConfig.symmetric(GSI, 0.0, pump=CavityMode.from_linewidth(GP, 0.001)).with_power_ratio(0.01)
    sw = synthetic_sweep(cfg, DP, 0.05, 1)
    with pytest.raises(ShallowDip):
        estimate_mismatch(sw, GSI)


def test_no_counts_degenerate():
    sw = SweepRecord.from_arrays(DP, np.zeros(DP.size), reflected_power_ratio(0.5, GP, DP))
    with pytest.raises(DegenerateData):
        estimate_mismatch(sw, GSI)


def test_temperature_mapping():
    assert temperature_to_mismatch(0.0) == 0.0
    assert temperature_to_mismatch(1e-3) / TWO_PI == pytest.approx(-14.4e6)
    assert temperature_to_mismatch(-1e-3) / TWO_PI == pytest.approx(14.4e6)


def test_sweep_csv_roundtrip(tmp_path):
    sw = synthetic_sweep(sweep_config(TWO_PI * -5e6), DP, 0.05, 4)
    p = tmp_path / "sweep.csv"
    write_sweep_csv(sw, p)
    back = read_sweep_csv(p)
    assert np.allclose(back.pump_detuning, sw.pump_detuning, rtol=1e-15)
    assert np.array_equal(back.counts.values, sw.counts.values)
    assert np.array_equal(back.reflection.values, sw.reflection.values)
