"""Pump-cavity response in the triply resonant configuration."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Axis, CavityMode, PumpEnvelope, Rectangular, Sampled, Trace
from .errors import ConfigurationError, GridTooShort, UnderSampledWarning
from .quadrature import causal_convolve


def _rate(mode: CavityMode, detuning: float) -> complex:
    return 0.5 * mode.linewidth_total - 1j * detuning


def pump_impulse_response(t, gamma_p: float, delta_p: float = 0.0):
    """exp(-(gamma_p/2 - i delta_p) t) for t >= 0 and exactly zero before."""
    t = np.asarray(t, dtype=float)
    z = 0.5 * gamma_p - 1j * delta_p
    out = np.where(t >= 0, np.exp(-z * np.where(t >= 0, t, 0.0)), 0.0)
    return out if out.ndim else complex(out)


def cw_intracavity_amplitude(amplitude_in: complex, mode: CavityMode, delta_p: float = 0.0) -> complex:
    return math.sqrt(mode.coupling_rate) * amplitude_in / _rate(mode, delta_p)


def cw_intracavity_energy(power_in, mode: CavityMode, delta_p=0.0):
    """Stored energy for a CW input; Lorentzian in the detuning with FWHM gamma_p."""
    power_in = np.asarray(power_in, dtype=float)
    if np.any(power_in < 0):
        raise ConfigurationError("input pump power must be non-negative")
    g = mode.linewidth_total
    out = mode.coupling_rate * power_in / (0.25 * g * g + np.asarray(delta_p, dtype=float) ** 2)
    return out if np.ndim(out) else float(out)


def reflected_power_ratio(kappa_p: float, gamma_p: float, delta_p):
    """P_out / P_in: an inverted Lorentzian, zero on resonance at critical coupling."""
    if not 0.0 <= kappa_p <= 1.0:
        raise ConfigurationError(f"coupling coefficient must lie in [0, 1], got {kappa_p!r}")
    d = np.asarray(delta_p, dtype=float)
    out = 1.0 - kappa_p * (1.0 - kappa_p) * gamma_p**2 / (0.25 * gamma_p**2 + d * d)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PumpResponse:
    axis: Axis
    intracavity_amplitude: np.ndarray

    def __post_init__(self):
        a = np.array(self.intracavity_amplitude, dtype=complex)
        a.flags.writeable = False
        object.__setattr__(self, "intracavity_amplitude", a)

    @property
    def times(self) -> np.ndarray:
        return self.axis.values

    @property
    def stored_energy(self) -> np.ndarray:
        return np.abs(self.intracavity_amplitude) ** 2

    def amplitude_trace(self) -> Trace:
        return Trace(self.axis, self.intracavity_amplitude, "alpha_p", "sqrt(J)")

    def energy_trace(self) -> Trace:
        return Trace(self.axis, self.stored_energy, "E_p", "J")

    def as_envelope(self) -> Sampled:
        """The intracavity amplitude as a pump envelope for the parametric modes."""
        return Sampled(self.axis.start, self.axis.step, self.intracavity_amplitude)


def rect_pulse_response(envelope: Rectangular, mode: CavityMode, delta_p: float,
                        grid: Axis) -> PumpResponse:
    """Closed-form intracavity amplitude for a rectangular input pulse.

    After the pulse the field rings down at the cavity resonance, i.e. it
    keeps rotating at delta_p relative to the pump frame while decaying at
    gamma_p/2.
    """
    tau = envelope.duration
    if grid.stop < tau * (1 - 1e-12):
        raise GridTooShort(f"grid ends at {grid.stop:g} s, before the pulse end {tau:g} s")
    z = _rate(mode, delta_p)
    steady = cw_intracavity_amplitude(envelope.amplitude, mode, delta_p)
    t = grid.values
    during = steady * -np.expm1(-z * np.clip(t, 0.0, tau))
    after = np.exp(-z * np.clip(t - tau, 0.0, None))
    amp = np.where(t < 0, 0.0, np.where(t <= tau, during, during * after))
    return PumpResponse(grid, amp)


def general_pulse_response(envelope: PumpEnvelope, mode: CavityMode, delta_p: float,
                           grid: Optional[Axis] = None) -> PumpResponse:
    """Discrete causal convolution of the input with the pump impulse response.

    The envelope is linear between samples and zero outside its support; by
    default the response is returned on the envelope's own axis.
    """
    if grid is None:
        if not isinstance(envelope, Sampled):
            raise ConfigurationError("a grid is required for non-sampled envelopes")
        grid = envelope.axis
    g = mode.linewidth_total
    if grid.step > 0.1 / g:
        warnings.warn(
            f"grid step {grid.step:g} s exceeds 0.1/gamma_p = {0.1 / g:g} s",
            UnderSampledWarning, stacklevel=2)
    samples = envelope.sample(grid, 1)
    amp = math.sqrt(mode.coupling_rate) * causal_convolve(samples, grid, _rate(mode, delta_p))
    return PumpResponse(grid, amp)


def intracavity_envelope(envelope: PumpEnvelope, mode: CavityMode, delta_p: float,
                         grid: Axis) -> PumpEnvelope:
    """Pump envelope seen by the parametric modes in the triply resonant case."""
    from .core import CW
    if isinstance(envelope, CW):
        return CW(cw_intracavity_amplitude(envelope.amplitude, mode, delta_p))
    if isinstance(envelope, Rectangular):
        return rect_pulse_response(envelope, mode, delta_p, grid).as_envelope()
    return general_pulse_response(envelope, mode, delta_p, grid).as_envelope()
