import math

import numpy as np
import pytest
from scipy import integrate

from cavitypairs import Axis, CavityMode, ProcessConfig, gaussian_pulse
from cavitypairs.cw import autocorrelation_cw, flux_cw
from cavitypairs.errors import AboveThreshold, ConfigurationError
from cavitypairs.langevin import (build_kernels, commutator_spectrum, commutator_weight, cross_commutator,
                                  flux_from_kernels, flux_out, g1_functions, g2_functions, pair_rate,
                                  spectra_closed, spectra_out)
from cavitypairs.pulsed import flux_pulsed

TAUS = np.array([0.0, 0.4, 1.3, 3.0, 7.5])


@pytest.mark.parametrize("order", [1, 2])
def test_autocorrelation_matches_closed_form(asymmetric, order):
    pc = asymmetric(order=order)
    g = g2_functions(build_kernels(pc), TAUS)
    assert np.max(np.abs(g["ss"] - autocorrelation_cw(TAUS, pc))) < 1e-12
    assert np.max(np.abs(g["ii"] - autocorrelation_cw(TAUS, pc))) < 1e-12


def test_cross_correlation_peak_and_shape(asymmetric):
    pc = asymmetric()
    g = g2_functions(build_kernels(pc), TAUS)["si"]
    peak = 1.0 / (pair_rate(pc) * (1 / pc.gamma_s + 1 / pc.gamma_i))
    assert g[0] - 1 == pytest.approx(peak, rel=1e-12)
    # idler later than signal decays at the idler rate
    assert np.allclose((g - 1) / peak, np.exp(-pc.gamma_i * TAUS), rtol=1e-10)


def test_fluxes_scale_with_escape_fraction(asymmetric):
    pc = asymmetric()
    ns, ni = flux_out(pc)
    assert ns == pytest.approx(pc.signal.kappa * pair_rate(pc), rel=1e-12)
    assert ni == pytest.approx(pc.idler.kappa * pair_rate(pc), rel=1e-12)


def test_lossless_cavities_have_no_loss_kernels(asymmetric):
    pc = asymmetric(ks=1.0, ki=1.0)
    k = build_kernels(pc)
    assert k.u_s.vanishes and k.v_s.vanishes and k.u_i.vanishes and k.v_i.vanishes
    ns, ni = flux_out(pc)
    assert ns == pytest.approx(ni, rel=1e-12)
    assert ns == pytest.approx(pair_rate(pc), rel=1e-12)


def test_no_coupling_no_pair_kernels():
    pc = ProcessConfig(CavityMode.from_linewidth(1.0, 0.8), CavityMode.from_linewidth(0.6, 0.7),
                       coupling_strength=0.0)
    k = build_kernels(pc)
    for name in ("V_s", "V_i", "v_s", "v_i"):
        assert k.kernel(name).vanishes
    assert flux_out(pc) == (0.0, 0.0)
    assert commutator_weight(k) == pytest.approx(1.0, abs=1e-13)


def test_spectra_closed_form(asymmetric):
    pc = asymmetric()
    w = np.linspace(-4, 4, 33)
    ss, si = spectra_out(pc, w)
    cs, ci = spectra_closed(pc, w)
    assert np.max(np.abs(ss / cs - 1)) < 1e-10
    assert np.max(np.abs(si / ci - 1)) < 1e-10


def test_spectrum_peak_on_resonance(symmetric):
    for order in (1, 2):
        pc = symmetric(kappa=0.8, ratio=0.02, order=order)
        assert spectra_out(pc, 0.0)[0] == pytest.approx(4 * 0.8 * 0.02, rel=1e-10)


def test_spectrum_integrates_to_flux(asymmetric):
    pc = asymmetric()
    ns, ni = flux_out(pc)
    for which, target in ((0, ns), (1, ni)):
        total = integrate.quad(lambda w: spectra_closed(pc, w)[which], -np.inf, np.inf, epsabs=0, epsrel=1e-12)[0]
        assert total / (2 * math.pi) == pytest.approx(target, rel=1e-9)


def test_commutator_defect_is_spectral_peak(asymmetric):
    # at first order in the coupling the commutator misses exactly the emitted spectral weight
    pc = asymmetric()
    k = build_kernels(pc)
    w = np.array([-1.0, 0.0, 0.7, 2.0])
    assert np.allclose(1 - commutator_spectrum(k, w), spectra_closed(pc, w)[0], rtol=1e-9)
    assert commutator_weight(k, "idler") == pytest.approx(1 - spectra_closed(pc, 0.0)[1], rel=1e-12)


def test_signal_idler_commutator_vanishes(asymmetric):
    k = build_kernels(asymmetric())
    c = cross_commutator(k, 1.0, np.array([-2.0, 0.3, 1.0, 2.0, 6.0]))
    assert np.max(np.abs(c)) < 1e-15


def test_first_order_correlations_hermitian_and_stationary(asymmetric):
    k = build_kernels(asymmetric())
    a = g1_functions(k, np.array([0.3, 1.1]), np.array([1.1, 0.3]))["ss"]
    assert a[0] == pytest.approx(np.conj(a[1]), rel=1e-13)
    b = g1_functions(k, np.array([5.3]), np.array([6.1]))["ss"]
    assert b[0] == pytest.approx(a[0], rel=1e-12)
    assert g1_functions(k, 0.0, 0.0)["ss"] == pytest.approx(flux_out(k.config)[0], rel=1e-12)


def test_pulsed_kernel_flux_follows_pulsed_trace(asymmetric):
    pc = asymmetric()
    ax = Axis(0.0, 0.01, 1001)
    env = gaussian_pulse(ax, 1.0, 4.0, math.sqrt(pc.drive))
    idx = np.array([200, 400, 600, 900])
    ns, _ = flux_from_kernels(build_kernels(pc, env, ax), ax.values[idx])
    scale = flux_out(pc)[0] / flux_cw(pc)
    assert np.allclose(ns, scale * flux_pulsed(pc, env, ax).values[idx], rtol=1e-4)
    with pytest.raises(ConfigurationError):
        g2_functions(build_kernels(pc, env, ax), TAUS)


def test_threshold_enforced(asymmetric):
    from cavitypairs import CW
    pc = asymmetric()
    with pytest.raises(AboveThreshold):
        build_kernels(pc, CW(1.01 * math.sqrt(pc.threshold)))
