"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line (visible even
under output capture) before asserting.  Run directly or through pytest:

    python -m pytest tests/test_acceptance.py -v
"""
import math
import sys

import numpy as np
import pytest
from scipy import stats
from scipy.optimize import brentq

from cavitypairs import (Axis, CavityMode, ProcessConfig, Rectangular, gaussian_pulse,
                         gaussian_pulse_spectrum)
from cavitypairs.biphoton import conjugate_axis, jsa, jsa_from_jta, jta_direct, jta_from_jsa
from cavitypairs.cw import autocorrelation_cw, autocorrelation_fwhm, flux_cw, spectrum_cw
from cavitypairs.estimation import estimate_mismatch, fit_double_exponential, synthetic_sweep
from cavitypairs.eventgen import coincidence_histogram, delay_cdf, sample_delays, sample_pairs
from cavitypairs.langevin import build_kernels, commutator_weight, flux_out, g2_functions, spectra_out
from cavitypairs.pulsed import flux_pulsed, flux_rect_closed

TWO_PI = 2 * math.pi
MHZ = TWO_PI * 1e6


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def local_maxima(y):
    return int(np.count_nonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])))


def test_criterion_01_spectral_width(report):
    pc = ProcessConfig.symmetric(1.0, 0.0).with_power_ratio(0.01)
    peak = spectrum_cw(0.0, pc)
    half = brentq(lambda w: spectrum_cw(w, pc) - 0.5 * peak, 0.0, 2.0, xtol=1e-14)
    ratio = 2 * half
    report(1, 0.640 <= ratio <= 0.648, f"FWHM/gamma = {ratio:.5f} (closed form {math.sqrt(math.sqrt(2) - 1):.5f})")


def test_criterion_02_double_peak_onset(report):
    w = np.linspace(-8.0, 8.0, 10_000)
    single = [0.0, 0.3, 0.6, 0.9, 0.99]
    double = [2.0, 2.5, 3.0, 5.0]
    counts = {}
    for d in single + double:
        pc = ProcessConfig.symmetric(1.0, d).with_power_ratio(0.01)
        counts[d] = local_maxima(spectrum_cw(w, pc))
    ok = all(counts[d] == 1 for d in single) and all(counts[d] == 2 for d in double)
    report(2, ok, f"peak counts by delta/gamma: {counts}")


def test_criterion_03_autocorrelation_width(report):
    pc = ProcessConfig.symmetric(1.0, 0.0).with_power_ratio(0.01)
    width = autocorrelation_fwhm(pc)
    g0 = autocorrelation_cw(0.0, pc)
    ok = abs(width - 4.3) <= 0.1 and abs(g0 - 2.0) <= 1e-12
    report(3, ok, f"FWHM*gamma = {width:.4f}, g2(0) = {g0!r}")


def test_criterion_04_flux_lorentzian(report):
    g = TWO_PI * 6.5e6
    pc = ProcessConfig.symmetric(g, 0.0).with_power_ratio(0.01)
    peak = flux_cw(pc, 0.0)
    half = brentq(lambda d: flux_cw(pc, d) - 0.5 * peak, 0.0, 5 * g, xtol=1e-12 * g, rtol=1e-15)
    width = 2 * half
    rel = abs(width / (2 * pc.gamma_mean) - 1)
    report(4, rel <= 1e-6, f"FWHM/(2 gamma) - 1 = {rel:.2e}; FWHM/2pi = {width / MHZ:.3f} MHz")


def test_criterion_05_pulsed_closed_form(report):
    tau_p = 10.0
    n = 40_001
    ax = Axis(0.0, 2 * tau_p / (n - 1), n)
    errs = {}
    for d in (0.0, 1.0, 2.0, 4.0):
        pc = ProcessConfig.symmetric(1.0, d).with_power_ratio(0.01)
        num = flux_pulsed(pc, Rectangular(math.sqrt(pc.drive), tau_p), ax).values / flux_cw(pc)
        ref = flux_rect_closed(ax.values, 1.0, d, tau_p)
        errs[d] = float(np.max(np.abs(num - ref)) / np.max(np.abs(ref)))
    report(5, max(errs.values()) <= 1e-4, "sup-norm relative error by delta/gamma: "
           + ", ".join(f"{k:g}: {v:.1e}" for k, v in errs.items()))


def test_criterion_06_ringdown_rate(report):
    tau_p = 10.0
    ax = Axis(0.0, 0.002, 10_001)
    rates = {}
    for d in (0.0, 1.0, 2.0, 4.0):
        pc = ProcessConfig.symmetric(1.0, d).with_power_ratio(0.01)
        n = flux_pulsed(pc, Rectangular(math.sqrt(pc.drive), tau_p), ax).values
        sel = (ax.values >= tau_p + 2) & (ax.values <= tau_p + 6)
        slope = np.polyfit(ax.values[sel], np.log(n[sel]), 1)[0]
        rates[d] = -slope
    ok = all(abs(r - 1.0) <= 0.01 for r in rates.values())
    report(6, ok, "decay rate/gamma by delta/gamma: " + ", ".join(f"{k:g}: {v:.5f}" for k, v in rates.items()))


def test_criterion_07_cross_picture(report):
    taus = np.linspace(0.0, 8.0, 41)
    w = np.linspace(-5.0, 5.0, 41)
    worst_g2 = worst_s = 0.0
    ratios = []
    deltas = (0.0, 0.5, 1.0, 2.0, 4.0)
    for d in deltas:
        pc = ProcessConfig.symmetric(1.0, d, kappa=0.8).with_power_ratio(0.01)
        k = build_kernels(pc)
        worst_g2 = max(worst_g2, float(np.max(np.abs(g2_functions(k, taus)["ss"] / autocorrelation_cw(taus, pc) - 1))))
        s = spectra_out(k, w)[0] / spectrum_cw(w, pc)
        worst_s = max(worst_s, float(np.max(np.abs(s / s[0] - 1))))
        ratios.append(flux_out(pc)[0] / flux_cw(pc))
    spread = float(np.ptp(ratios) / np.mean(ratios))
    ok = worst_g2 <= 1e-6 and worst_s <= 1e-6 and spread <= 1e-8
    report(7, ok, f"g2 {worst_g2:.1e}, spectrum {worst_s:.1e}, flux ratio spread {spread:.1e}")


def test_criterion_08_commutator_weight(report):
    # At first order in the coupling the weight is 1 - S(0), i.e. 1 - 4 kappa (P/P0)^j;
    # the 1e-4 target cannot be met by first-order kernels at (P/P0)^j = 1e-2.
    pc = ProcessConfig.symmetric(1.0, 0.0).with_power_ratio(0.01)
    wgt = commutator_weight(build_kernels(pc))
    report(8, abs(wgt - 1.0) <= 1e-4, f"weight = {wgt:.6f}, |weight - 1| = {abs(wgt - 1):.2e}")


def test_criterion_09_mismatch_estimation(report):
    g = TWO_PI * 6.5e6
    pump = CavityMode.from_linewidth(TWO_PI * 28.8e6, 0.5)
    dp = np.linspace(-TWO_PI * 50e6, TWO_PI * 50e6, 201)
    lo, hi = 0.9 * 13.1, 1.1 * 14.3
    ok = True
    parts = []
    for i, mhz in enumerate((0.0, -5.0, -10.0, -22.2)):
        d0 = mhz * MHZ
        pc = ProcessConfig.symmetric(g, d0, pump=pump).with_power_ratio(0.01)
        clean = estimate_mismatch(synthetic_sweep(pc, dp), g)
        seeds = np.random.SeedSequence(100 + i).spawn(50)
        noisy = np.median([estimate_mismatch(synthetic_sweep(pc, dp, 0.05, s), g)["delta0"] for s in seeds])
        # a zero target has no relative scale; use one percent of the linewidth instead
        tol_clean = max(0.01 * abs(d0), 1e-6 * g)
        tol_noisy = max(0.10 * abs(d0), 0.01 * g)
        fwhm = clean["fwhm_check"] / MHZ
        ok &= abs(clean["delta0"] - d0) <= tol_clean and abs(noisy - d0) <= tol_noisy and lo <= fwhm <= hi
        parts.append(f"{mhz:g}: {clean['delta0'] / MHZ:.4f}/{noisy / MHZ:.3f} MHz fwhm {fwhm:.3f}")
    report(9, ok, "; ".join(parts))


def test_criterion_10_event_pipeline(report):
    t_si = 24.3e-9
    pc = ProcessConfig.symmetric(1 / t_si, 0.0).with_power_ratio(0.01)
    ev = sample_pairs(pc, 2000.0, 50.0, 0.5, 0.5, seed=1)
    hist = coincidence_histogram(ev, 2.2e-9, 250e-9)
    total = float(hist.values.sum())
    fit = fit_double_exponential(hist, symmetric=True)
    rel = abs(fit["decay_time_left"] / t_si - 1)
    d = sample_delays(pc.gamma_s, pc.gamma_i, 1_000_000, np.random.default_rng(2024))
    edges = np.linspace(-6 * t_si, 6 * t_si, 61)
    obs, _ = np.histogram(d, edges)
    exp = np.diff(delay_cdf(edges, pc.gamma_s, pc.gamma_i))
    exp *= obs.sum() / exp.sum()
    p = float(stats.chisquare(obs, exp).pvalue)
    ok = total >= 1e4 and rel <= 0.05 and p > 0.01
    report(10, ok, f"{total:.0f} coincidences, t_si error {rel:.2%}, chi-square p = {p:.3f}")


def test_criterion_11_fourier_duality(report):
    rng = np.random.default_rng(11)
    t = Axis(-3.0, 0.05, 256)
    from cavitypairs.biphoton import JointTemporalAmplitude
    v = rng.standard_normal((256, 256)) + 1j * rng.standard_normal((256, 256))
    back = jta_from_jsa(jsa_from_jta(JointTemporalAmplitude((t, t), v, "Psi")), time_start=t.start)
    trip = float(np.max(np.abs(back.values - v)) / np.max(np.abs(v)))

    pc = ProcessConfig.symmetric(1.0, 0.7).with_power_ratio(0.01)
    width, n, span = 1.0, 4096, 28.0
    start = -4 * width
    ax = Axis(start, span / n, n)
    w = conjugate_axis(ax)
    psi = jta_from_jsa(jsa(pc, gaussian_pulse_spectrum(width), (w, w)), time_start=start).values
    ref = jta_direct(pc, gaussian_pulse(ax, width), (ax, ax)).values
    path = float(np.linalg.norm(psi - ref) / np.linalg.norm(ref))
    del psi, ref
    report(11, trip <= 1e-10 and path <= 1e-4, f"round trip {trip:.1e}, spectral vs direct {path:.1e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
