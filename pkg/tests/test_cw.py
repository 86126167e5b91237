import math

import numpy as np
import pytest
from scipy import integrate, optimize

from cavitypairs import CavityMode, ProcessConfig
from cavitypairs.biphoton import cavity_line, jta_cw
from cavitypairs.cw import (autocorrelation_cw, autocorrelation_fwhm, autocorrelation_general_form,
                            cross_correlation_cw, flux_cw, flux_triply_resonant, fwhm_inverse_validity,
                            mismatch_from_fwhm, spectrum_cw)
from cavitypairs.errors import ConfigurationError

TWO_PI = 2 * math.pi


def maxima(y):
    return np.nonzero((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:]))[0] + 1


def test_cavity_line_values():
    m = CavityMode.from_linewidth(2.0)
    assert cavity_line(0.0, m) == pytest.approx(1.0)
    assert abs(cavity_line(1.0, m)) ** 2 == pytest.approx(0.5 * abs(cavity_line(0.0, m)) ** 2)
    assert abs(cavity_line(1.0, m)) ** 2 == pytest.approx(2 / 2.0**2)
    assert abs(cavity_line(1e9, m)) < 1e-8


def test_cross_correlation_shape():
    t = 24.3e-9
    assert cross_correlation_cw(0.0, 1 / t, 1 / t) == 1.0
    assert cross_correlation_cw(t, 1 / t, 1 / t) == pytest.approx(math.exp(-1))
    assert cross_correlation_cw(-t, 1 / t, 1 / t) == pytest.approx(math.exp(-1))
    assert cross_correlation_cw(1.0, 1.0, 0.5) == pytest.approx(math.exp(-0.5))
    assert cross_correlation_cw(-1.0, 1.0, 0.5) == pytest.approx(math.exp(-1.0))


def test_flux_lorentzian(symmetric):
    pc = symmetric(delta=0.0)
    assert flux_cw(pc, pc.gamma_mean) == pytest.approx(0.5 * flux_cw(pc))
    assert flux_cw(pc) == pytest.approx(pc.drive / pc.gamma_mean**2)


@pytest.mark.parametrize("order,factor", [(1, 2.0), (2, 4.0)])
def test_flux_power_scaling(symmetric, order, factor):
    pc = symmetric(order=order, ratio=1e-3)
    assert flux_cw(pc.replace(pump_power=2 * pc.pump_power)) == pytest.approx(factor * flux_cw(pc))


def test_triply_resonant_rate():
    pump = CavityMode.from_linewidth(TWO_PI * 28.8e6, 0.5)
    g = 1 / 24.3e-9
    s = CavityMode.from_linewidth(g)
    sym = ProcessConfig(s, s, pump, mismatch_delta=0.0).with_power_ratio(0.01)
    dp = np.linspace(-TWO_PI * 50e6, TWO_PI * 50e6, 2001)
    r = flux_triply_resonant(sym, dp)
    assert dp[np.argmax(r)] == pytest.approx(0.0, abs=1e-6)
    assert np.allclose(r, r[::-1], rtol=1e-12)
    d0 = -TWO_PI * 10e6
    off = ProcessConfig(s, s, pump, mismatch_delta=d0).with_power_ratio(0.01)
    norm = flux_triply_resonant(off, dp) / (1.0 / (pump.linewidth_total**2 / 4 + dp**2)) ** 1
    assert dp[np.argmax(norm)] == pytest.approx(-d0, abs=np.diff(dp)[0])
    # normalized counts: Lorentzian of FWHM 2 gamma
    peak = flux_triply_resonant(off, -d0) * (pump.linewidth_total**2 / 4 + d0**2)
    f = lambda x: flux_triply_resonant(off, x) * (pump.linewidth_total**2 / 4 + x**2) / peak - 0.5
    lo = optimize.brentq(f, -d0 - 5 * g, -d0, xtol=1e-6)
    hi = optimize.brentq(f, -d0, -d0 + 5 * g, xtol=1e-6)
    assert hi - lo == pytest.approx(2 * g, rel=1e-9)


def test_squared_lorentzian_width(symmetric):
    pc = symmetric()

    def excess(w):
        return spectrum_cw(w, pc) / spectrum_cw(0.0, pc) - 0.5

    w_half = optimize.brentq(excess, 0.0, 2.0, xtol=1e-15)
    assert 2 * w_half == pytest.approx(math.sqrt(math.sqrt(2) - 1), rel=1e-10)


def test_split_spectrum(symmetric, asymmetric):
    w = np.linspace(-4, 8, 24001)
    s = spectrum_cw(w, symmetric(delta=4.0))
    pk = maxima(s)
    assert len(pk) == 2
    assert w[pk[0]] == pytest.approx(0.0, abs=0.1) and w[pk[1]] == pytest.approx(4.0, abs=0.1)
    a = asymmetric(gs=1.2, gi=0.6, delta=4 * 0.9)
    s = spectrum_cw(w, a)
    pk = maxima(s)
    assert len(pk) == 2 and not math.isclose(s[pk[0]], s[pk[1]], rel_tol=1e-2)
    widths = []
    for k in pk:
        half = 0.5 * s[k]
        lo = k
        while s[lo] > half:
            lo -= 1
        widths.append(k - lo)
    assert widths[0] != widths[1]


@pytest.mark.parametrize("delta", [0.0, 0.5, 3.0])
def test_autocorrelation_at_zero(symmetric, delta):
    assert autocorrelation_cw(0.0, symmetric(delta=delta)) == 2.0


def test_autocorrelation_fwhm_value(symmetric):
    assert autocorrelation_fwhm(symmetric()) == pytest.approx(4.3, abs=0.1)


def test_general_form_reduces_to_equal_rate_form(symmetric):
    tau = np.linspace(-12, 12, 481)
    for d in (0.0, 0.3, 2.0, 5.0):
        pc = symmetric(delta=d)
        compact = autocorrelation_cw(tau, pc)
        general = autocorrelation_cw(tau, pc, rtol_equal=-1.0)    # force the general branch
        assert np.max(np.abs(general - compact)) < 1e-10
        if d:
            literal = 1 + autocorrelation_general_form(tau, 1.0, 1.0, d)
            assert np.max(np.abs(literal - compact)) < 1e-10


@pytest.mark.parametrize("gs,gi,d", [(1.0, 0.5, 0.0), (1.0, 0.6, 1.4), (0.4, 1.1, 3.0)])
def test_autocorrelation_against_pair_amplitude(asymmetric, gs, gi, d):
    pc = asymmetric(gs=gs, gi=gi, delta=d)
    tau = np.array([0.0, 0.3, 1.0, 2.5, -1.7])
    ga = autocorrelation_cw(tau, pc)
    assert np.max(np.abs(1 + autocorrelation_general_form(tau, gs, gi, d) - ga)) < 1e-12
    # <a^dag(0) a(tau)> = integral Psi*(0, s) Psi(tau, s) ds for the pair amplitude
    lim = 60 / min(gs, gi)

    def corr(t1):
        def f(s, part):
            v = np.conj(jta_cw(pc, 0.0, s)) * jta_cw(pc, t1, s)
            return v.real if part == 0 else v.imag
        pts = sorted({0.0, t1})
        re = sum(integrate.quad(f, a, b, args=(0,), epsabs=1e-15, epsrel=1e-12, limit=200)[0]
                 for a, b in zip([-lim] + pts, pts + [lim]))
        im = sum(integrate.quad(f, a, b, args=(1,), epsabs=1e-15, epsrel=1e-12, limit=200)[0]
                 for a, b in zip([-lim] + pts, pts + [lim]))
        return re + 1j * im

    n = corr(0.0).real
    ref = np.array([1 + abs(corr(t)) ** 2 / n**2 for t in tau])
    assert np.max(np.abs(ref - ga)) < 1e-6


def test_autocorrelation_oscillation_period(symmetric):
    d = 4.0
    tau = np.linspace(0.05, 6.0, 60001)
    y = autocorrelation_cw(tau, symmetric(delta=d)) - 1
    mins = np.nonzero((y[1:-1] < y[:-2]) & (y[1:-1] < y[2:]))[0] + 1
    assert np.allclose(np.diff(tau[mins])[:3], 2 * math.pi / d, rtol=2e-2)


def test_fwhm_inverse_roundtrip():
    lo, hi = fwhm_inverse_validity()
    assert lo < 4.3 and hi == pytest.approx(4.3, abs=0.05)
    g = 2.0
    for d in (0.5, 1.0, 2.5):
        pc = ProcessConfig.symmetric(g, d).with_power_ratio(0.01)
        assert mismatch_from_fwhm(autocorrelation_fwhm(pc), g) == pytest.approx(d, rel=1e-6)
    with pytest.raises(ConfigurationError):
        mismatch_from_fwhm(10.0 / g, g)
