"""Closed-form observables for a constant pump."""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .biphoton import LineShape, cavity_line
from .core import ProcessConfig, require_pump
from .errors import ConfigurationError
from .pump import cw_intracavity_energy
from .quadrature import exprel


def _scalar(x):
    return x if np.ndim(x) else float(x)


def cross_correlation_cw(tau, gamma_s: float, gamma_i: float):
    """Two-sided exponential in tau = t_idler - t_signal, peak value 1."""
    tau = np.asarray(tau, dtype=float)
    out = np.where(tau < 0, np.exp(gamma_s * np.minimum(tau, 0.0)),
                   np.exp(-gamma_i * np.maximum(tau, 0.0)))
    return _scalar(out)


def flux_cw(config: ProcessConfig, delta=None):
    """Pair flux drive^j / (gamma_mean^2 + delta^2), arbitrary units."""
    d = config.delta if delta is None else np.asarray(delta, dtype=float)
    out = config.drive ** config.process_order / (config.gamma_mean**2 + np.square(d))
    return _scalar(out)


def flux_triply_resonant(config: ProcessConfig, pump_detuning=None):
    """Count rate versus pump detuning with a resonant pump mode.

    The stored pump energy follows the pump Lorentzian, while the mismatch
    seen by the parametric process shifts with the detuning.
    """
    pump = require_pump(config)
    dp = config.pump_detuning if pump_detuning is None else np.asarray(pump_detuning, dtype=float)
    energy = cw_intracavity_energy(config.pump_power, pump, dp)
    delta = config.mismatch_delta + dp
    out = np.asarray(energy) ** config.process_order / (config.gamma_mean**2 + np.square(delta))
    return _scalar(out)


def spectrum_cw(omega, config: ProcessConfig, which: str = "signal",
                line_shape: LineShape = cavity_line):
    """Single-photon spectral density |F_a(w)|^2 |F_b(w - delta)|^2 drive^j."""
    own, other = _modes(config, which)
    omega = np.asarray(omega, dtype=float)
    s = np.abs(line_shape(omega, own)) ** 2 * np.abs(line_shape(omega - config.delta, other)) ** 2
    return _scalar(s * config.drive ** config.process_order)


def _modes(config: ProcessConfig, which: str):
    if which == "signal":
        return config.signal, config.idler
    if which == "idler":
        return config.idler, config.signal
    raise ConfigurationError(f"which must be 'signal' or 'idler', got {which!r}")


def autocorrelation_cw(tau, config: ProcessConfig, rtol_equal: float = 1e-12):
    """Normalized g2 of either arm (the two coincide for a constant pump).

    Equal linewidths use the compact trigonometric form; otherwise the
    general expression is evaluated in a cancellation-free arrangement, so
    nearly equal linewidths and small mismatches need no special casing.
    """
    tau = np.abs(np.asarray(tau, dtype=float))
    gs, gi, d = config.gamma_s, config.gamma_i, config.delta
    g = config.gamma_mean
    if abs(gs - gi) <= rtol_equal * g:
        # (g/d) sin(d tau/2) written through sinc so that d = 0 needs no branch
        bracket = np.cos(0.5 * d * tau) + 0.5 * g * tau * np.sinc(d * tau / (2 * math.pi))
        excess = bracket**2 * np.exp(-g * tau)
    else:
        c = 0.5 * (gs - gi) + 1j * d
        inner = 1.0 + gs * (g + 1j * d) * tau * exprel(c * tau) / (2 * g)
        excess = np.exp(-gs * tau) * np.abs(inner) ** 2
    return _scalar(1.0 + excess)


def autocorrelation_general_form(tau, gamma_s: float, gamma_i: float, delta: float):
    """Direct transcription of the general excess-bunching expression.

    Returns g2 - 1.  Kept as an independent reference for the rearranged
    form used by :func:`autocorrelation_cw`; it loses precision when
    gamma_s is close to gamma_i with small delta.
    """
    tau = np.abs(np.asarray(tau, dtype=float))
    gs, gi, d = gamma_s, gamma_i, delta
    g = 0.5 * (gs + gi)
    num = ((gi**2 * np.exp(-gs * tau) + gs**2 * np.exp(-gi * tau)) * (g * g + d * d)
           - 2 * gs * gi * (g * g - d * d) * np.cos(tau * d) * np.exp(-g * tau)
           + 4 * gs * gi * g * d * np.sin(tau * d) * np.exp(-g * tau))
    return _scalar(num / (g * g * ((gs - gi) ** 2 + 4 * d * d)))


# ---------------------------------------------------------------------------
# autocorrelation width and its inverse
# ---------------------------------------------------------------------------

def autocorrelation_fwhm(config: ProcessConfig) -> float:
    """Full width at half maximum of g2 - 1 (seconds).

    The half level is located at the first crossing after tau = 0.
    """
    g = config.gamma_mean
    f = lambda x: autocorrelation_cw(x, config) - 1.5
    step = 0.05 / (g + abs(config.delta))
    x = 0.0
    while f(x + step) > 0:
        x += step
        if x > 200.0 / g:
            raise ConfigurationError("g2 - 1 does not fall to half maximum")
    return 2.0 * brentq(f, x, x + step, xtol=1e-14 / g, rtol=1e-14)


def _fwhm_units(ratio: float) -> float:
    cfg = ProcessConfig.symmetric(1.0, delta=ratio)
    return autocorrelation_fwhm(cfg)


@lru_cache(maxsize=None)
def _monotone_limit() -> float:
    """Largest delta/gamma up to which gamma*FWHM decreases strictly."""
    r = np.linspace(0.0, 40.0, 4001)
    w = np.array([_fwhm_units(x) for x in r])
    bad = np.nonzero(np.diff(w) >= 0)[0]
    return float(r[bad[0]]) if bad.size else float(r[-1])


def fwhm_inverse_validity() -> Tuple[float, float]:
    """Interval of gamma*tau_FWHM over which the mismatch can be inverted.

    Returns (lowest, highest) attainable widths in units of 1/gamma; the
    highest is the zero-mismatch width.
    """
    return _fwhm_units(_monotone_limit()), _fwhm_units(0.0)


def mismatch_from_fwhm(tau_fwhm: float, gamma: float) -> float:
    """|delta| producing a given autocorrelation width for equal linewidths."""
    lo, hi = fwhm_inverse_validity()
    x = tau_fwhm * gamma
    if not lo <= x <= hi:
        raise ConfigurationError(
            f"gamma*tau_FWHM = {x:.4g} lies outside the invertible range [{lo:.4g}, {hi:.4g}]")
    if x == hi:
        return 0.0
    r = brentq(lambda q: _fwhm_units(q) - x, 0.0, _monotone_limit(), xtol=1e-12)
    return r * gamma
