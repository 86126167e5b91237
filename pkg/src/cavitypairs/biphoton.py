"""Joint spectral and temporal amplitudes of a photon pair.

Amplitudes carry no absolute normalization: the proportionality constant is
fixed to 1.  Frequencies are offsets from the signal and idler resonances.

Fourier convention (per axis)::

    psi(t)   = (1/sqrt(2 pi)) * integral phi(w) exp(-i w t) dw
    phi(w)   = (1/sqrt(2 pi)) * integral psi(t) exp(+i w t) dt
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .core import (
    CW,
    TWO_PI,
    Axis,
    CavityMode,
    Grid2D,
    ProcessConfig,
    PumpEnvelope,
    Trace,
)
from .errors import ConfigurationError, GridMismatch, NonUniformGrid, UnderSampled
from .quadrature import causal_convolve

LineShape = Callable[[np.ndarray, CavityMode], np.ndarray]


def cavity_line(omega, mode: Union[CavityMode, float]):
    """Lorentzian resonance response (gamma/2 - i omega)^-1."""
    gamma = mode.linewidth_total if isinstance(mode, CavityMode) else float(mode)
    out = 1.0 / (0.5 * gamma - 1j * np.asarray(omega, dtype=float))
    return out if np.ndim(out) else complex(out)


class JointSpectralAmplitude(Grid2D):
    pass


class JointTemporalAmplitude(Grid2D):
    pass


@dataclass(frozen=True)
class AntiDiagonalJSA:
    """Spectral amplitude for a monochromatic pump.

    The full amplitude is ``weight(w) * delta(w + w' - delta)``; only the
    weight along the line is stored.
    """

    config: ProcessConfig
    amplitude: complex
    line_shape: LineShape = cavity_line

    @property
    def delta(self) -> float:
        return self.config.delta

    def weight(self, omega):
        omega = np.asarray(omega, dtype=float)
        return (self.amplitude * self.line_shape(omega, self.config.signal)
                * self.line_shape(self.delta - omega, self.config.idler))

    def partner(self, omega):
        """Idler frequency paired with signal frequency ``omega``."""
        return self.delta - np.asarray(omega, dtype=float)


def _pump_amplitude(config: ProcessConfig, amplitude: Optional[complex]) -> complex:
    if amplitude is None:
        return complex(math.sqrt(config.drive)) ** config.process_order
    return complex(amplitude) ** config.process_order


def effective_pump_spectrum(field_spectrum: Callable, order: int, axis: Axis) -> Trace:
    """Pump spectrum entering the interaction, sampled on ``axis``.

    For four-wave mixing this is the autoconvolution of the field spectrum,
    computed by trapezoidal quadrature on the same axis.
    """
    w = axis.values
    a = np.asarray(field_spectrum(w), dtype=complex)
    if order == 1:
        return Trace(axis, a, "alpha_p", "")
    if order != 2:
        raise ConfigurationError("process order must be 1 or 2")
    full = np.convolve(a, a) * axis.step
    # full[k] sits at 2*w[0] + k*step
    k0 = int(round((w[0] - 2 * w[0]) / axis.step))
    vals = full[k0:k0 + axis.size] if k0 >= 0 else np.zeros(axis.size, complex)
    return Trace(axis, vals, "alpha_eff", "")


def _spectrum_callable(pump_spectrum) -> Callable:
    if callable(pump_spectrum):
        return pump_spectrum
    if isinstance(pump_spectrum, Trace):
        x = pump_spectrum.x
        v = np.asarray(pump_spectrum.values, dtype=complex)

        def interp(omega):
            omega = np.asarray(omega, dtype=float)
            re = np.interp(omega, x, v.real, left=0.0, right=0.0)
            im = np.interp(omega, x, v.imag, left=0.0, right=0.0)
            return re + 1j * im
        return interp
    raise ConfigurationError("pump spectrum must be callable, a Trace, or a CW envelope")


def jsa(config: ProcessConfig, pump_spectrum, grid: Optional[Tuple[Axis, Axis]] = None,
        line_shape: LineShape = cavity_line):
    """Joint spectral amplitude alpha_eff(w + w' - delta) F_s(w) F_i(w').

    ``pump_spectrum`` is the effective spectrum: the field spectrum for
    down-conversion, its autoconvolution for four-wave mixing (see
    :func:`effective_pump_spectrum`).  A :class:`CW` envelope gives an
    :class:`AntiDiagonalJSA`.
    """
    if isinstance(pump_spectrum, CW):
        return AntiDiagonalJSA(config, _pump_amplitude(config, pump_spectrum.amplitude), line_shape)
    if grid is None:
        grid = default_frequency_grid(config)
    if len(grid) != 2 or not all(isinstance(a, Axis) for a in grid):
        raise GridMismatch("frequency grid must be a pair of axes")
    ax_s, ax_i = grid
    if abs(ax_s.step - ax_i.step) > 1e-9 * ax_s.step:
        raise GridMismatch("signal and idler frequency axes must share a step")
    spec = _spectrum_callable(pump_spectrum)
    w, wp = ax_s.values, ax_i.values
    alpha = np.asarray(spec(w[:, None] + wp[None, :] - config.delta), dtype=complex)
    vals = alpha * line_shape(w, config.signal)[:, None] * line_shape(wp, config.idler)[None, :]
    if not np.all(np.isfinite(vals)):
        raise GridMismatch("joint spectral amplitude is not finite on this grid")
    return JointSpectralAmplitude((ax_s, ax_i), vals, "Phi")


def jsa_from_samples(omega, omega_prime, values) -> JointSpectralAmplitude:
    a = Axis.from_values(omega, "omega", "rad/s")
    b = Axis.from_values(omega_prime, "omega'", "rad/s")
    return JointSpectralAmplitude((a, b), np.asarray(values, dtype=complex), "Phi")


def default_time_axis(config: ProcessConfig, size: int = 1024, start: float = 0.0) -> Axis:
    span = 20.0 / min(config.gamma_s, config.gamma_i)
    return Axis(start, span / (size - 1), size, "t", "s")


def default_frequency_grid(config: ProcessConfig, size: int = 1024) -> Tuple[Axis, Axis]:
    t = default_time_axis(config, size)
    ax = conjugate_axis(t)
    return ax, ax


# ---------------------------------------------------------------------------
# temporal amplitudes
# ---------------------------------------------------------------------------

def jta_cw(config: ProcessConfig, t, t_prime, amplitude: Optional[complex] = None):
    """Closed-form temporal amplitude for a constant pump (broadcasting)."""
    t = np.asarray(t, dtype=float)
    tp = np.asarray(t_prime, dtype=float)
    d = config.delta
    pre = _pump_amplitude(config, amplitude) / (config.gamma_mean - 1j * d)
    early = t <= tp
    lag = np.abs(tp - t)
    rate = np.where(early, config.gamma_i, config.gamma_s)
    phase_t = np.where(early, t, tp)
    out = pre * np.exp(-0.5 * rate * lag - 1j * d * phase_t)
    return out if out.ndim else complex(out)


def _common_axis(grid) -> Axis:
    if isinstance(grid, Axis):
        return grid
    a, b = grid
    if not a.compatible(b):
        raise GridMismatch("temporal amplitude needs the same axis for t and t'")
    return a


def check_time_step(config: ProcessConfig, axis: Axis, factor: float = 0.1) -> None:
    limit = factor / max(config.gamma_s, config.gamma_i)
    if axis.step > limit * (1 + 1e-12):
        raise UnderSampled(f"time step {axis.step:g} s exceeds {limit:g} s")


def diagonal_amplitude(config: ProcessConfig, envelope: PumpEnvelope, axis: Axis) -> np.ndarray:
    """D(t) = Psi(t, t) on the grid.

    Off the diagonal the amplitude follows from D alone:
    ``Psi(t_k, t_l) = D_k exp(-gamma_i (t_l - t_k)/2)`` for ``t_k <= t_l``
    and the mirrored expression with gamma_s otherwise.
    """
    env = _parametric_envelope(config, envelope, axis)
    samples = env.sample(axis, config.process_order)
    d = config.delta
    z = config.gamma_mean - 1j * d
    return np.exp(-1j * d * axis.values) * causal_convolve(samples, axis, z)


def _parametric_envelope(config: ProcessConfig, envelope: PumpEnvelope, axis: Axis):
    if config.pump is None:
        return envelope
    from .pump import intracavity_envelope
    return intracavity_envelope(envelope, config.pump, config.pump_detuning, axis)


def jta_rows(config: ProcessConfig, diag: np.ndarray, axis: Axis, rows) -> np.ndarray:
    """Rows Psi(t_k, .) for node indices ``rows``."""
    n = axis.size
    h = axis.step
    es = np.exp(-0.5 * config.gamma_s * h * np.arange(n))
    ei = np.exp(-0.5 * config.gamma_i * h * np.arange(n))
    rows = np.atleast_1d(rows)
    out = np.empty((rows.size, n), dtype=complex)
    for r, k in enumerate(rows):
        out[r, k:] = diag[k] * ei[:n - k]
        out[r, :k] = diag[:k] * es[k:0:-1]
    return out


def jta_columns(config: ProcessConfig, diag: np.ndarray, axis: Axis, cols) -> np.ndarray:
    """Columns Psi(., t'_l), returned as rows."""
    n = axis.size
    h = axis.step
    es = np.exp(-0.5 * config.gamma_s * h * np.arange(n))
    ei = np.exp(-0.5 * config.gamma_i * h * np.arange(n))
    cols = np.atleast_1d(cols)
    out = np.empty((cols.size, n), dtype=complex)
    for r, l in enumerate(cols):
        out[r, l:] = diag[l] * es[:n - l]
        out[r, :l] = diag[:l] * ei[l:0:-1]
    return out


def jta_direct(config: ProcessConfig, envelope: PumpEnvelope, grid, check: bool = True
               ) -> JointTemporalAmplitude:
    """Temporal amplitude by quadrature of the pump convolution integral.

    The envelope (raised to the process order) is taken linear between grid
    nodes and the exponentials are integrated exactly, so constant and
    rectangular pumps are reproduced to rounding error.
    """
    axis = _common_axis(grid)
    if check:
        check_time_step(config, axis)
    diag = diagonal_amplitude(config, envelope, axis)
    vals = jta_rows(config, diag, axis, np.arange(axis.size))
    return JointTemporalAmplitude((axis, axis), vals, "Psi")


# ---------------------------------------------------------------------------
# discrete Fourier pair
# ---------------------------------------------------------------------------

def conjugate_axis(axis: Axis, start: Optional[float] = None) -> Axis:
    """Axis with step 2 pi/(N step); centred on zero unless ``start`` is given."""
    n = axis.size
    step = TWO_PI / (n * axis.step)
    if start is None:
        start = -(n // 2) * step
    label = "omega" if axis.unit == "s" else "t"
    unit = "rad/s" if axis.unit == "s" else "s"
    return Axis(start, step, n, label, unit)


def _transform_axis(values: np.ndarray, src: Axis, dst: Axis, sign: int, axis: int) -> np.ndarray:
    # sum_k x_k exp(sign*i*(x0 + k dx)(y0 + n dy)), with dx*dy = 2 pi/N
    n = src.size
    if abs(src.step * dst.step * n - TWO_PI) > 1e-9 * TWO_PI:
        raise GridMismatch("axes are not a conjugate pair")
    k = np.arange(n)
    shape = [1, 1]
    shape[axis] = n
    pre = np.exp(sign * 1j * k * src.step * dst.start).reshape(shape)
    post = np.exp(sign * 1j * src.start * dst.values).reshape(shape)
    x = values * pre
    y = np.fft.fft(x, axis=axis) if sign < 0 else np.fft.ifft(x, axis=axis) * n
    return y * post * (src.step / math.sqrt(TWO_PI))


def jta_from_jsa(amplitude: JointSpectralAmplitude, time_start: Optional[float] = None
                 ) -> JointTemporalAmplitude:
    """Discrete 2-D transform Phi(w, w') -> Psi(t, t') with exp(-i w t)."""
    _require_uniform(amplitude)
    a, b = amplitude.axes
    ta = conjugate_axis(a, time_start)
    tb = conjugate_axis(b, time_start)
    v = _transform_axis(np.asarray(amplitude.values, dtype=complex), a, ta, -1, 0)
    v = _transform_axis(v, b, tb, -1, 1)
    return JointTemporalAmplitude((ta, tb), v, "Psi")


def jsa_from_jta(amplitude: JointTemporalAmplitude, frequency_start: Optional[float] = None
                 ) -> JointSpectralAmplitude:
    """Inverse of :func:`jta_from_jsa`."""
    _require_uniform(amplitude)
    a, b = amplitude.axes
    wa = conjugate_axis(a, frequency_start)
    wb = conjugate_axis(b, frequency_start)
    v = _transform_axis(np.asarray(amplitude.values, dtype=complex), a, wa, +1, 0)
    v = _transform_axis(v, b, wb, +1, 1)
    return JointSpectralAmplitude((wa, wb), v, "Phi")


def _require_uniform(g: Grid2D) -> None:
    if not isinstance(g, Grid2D) or not all(isinstance(a, Axis) for a in g.axes):
        raise NonUniformGrid("Fourier transforms need uniformly sampled axes")
