"""Output-field statistics from the linearized Heisenberg-Langevin solution.

The output operators are linear integral transforms of the input noise
operators.  Every observable here is a deterministic contraction of those
transform kernels against the white-noise input correlators; no noise is
ever sampled.  Absolute prefactors are retained (fluxes in photons/s).

Kernels are valid to first order in the nonlinear coupling.  The singular
``-delta(t - t')`` part of the direct-transmission kernel is kept as a tagged
coefficient and contracted analytically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .core import CW, TWO_PI, Axis, EnvelopeSamples, ProcessConfig, PumpEnvelope
from .errors import AboveThreshold, ConfigurationError, ZeroFlux
from .quadrature import causal_convolve, exprel

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class Kernel:
    """coefficient * shape(t, t') + delta_coefficient * delta(t - t').

    ``decay_rate`` is the exponential rate at which the kernel falls off as
    its second argument moves to earlier times before the grid start; it is
    used for the analytic tail of sampled contractions.
    """

    name: str
    coefficient: complex
    shape: Callable
    delta_coefficient: float = 0.0
    decay_rate: float = 0.0

    def __call__(self, t, t_prime):
        return self.coefficient * self.shape(np.asarray(t, float), np.asarray(t_prime, float))

    @property
    def vanishes(self) -> bool:
        return self.coefficient == 0 and self.delta_coefficient == 0


@dataclass(frozen=True)
class KernelSet:
    config: ProcessConfig
    U_s: Kernel
    U_i: Kernel
    u_s: Kernel
    u_i: Kernel
    V_s: Kernel
    V_i: Kernel
    v_s: Kernel
    v_i: Kernel
    stationary: bool
    grid: Optional[Axis] = None

    def kernel(self, name: str) -> Kernel:
        return getattr(self, name)


# ---------------------------------------------------------------------------
# kernel construction
# ---------------------------------------------------------------------------

def _response(gamma: float) -> Callable:
    def shape(t, s):
        x = t - s
        return np.where(x >= 0, np.exp(-0.5 * gamma * np.maximum(x, 0.0)), 0.0)
    return shape


def _cw_pair_shape(g_own: float, g_other: float, delta: float) -> Callable:
    # integral_{s}^{t} G_own(t - x) e^{-i delta x} G_other(x - s) dx
    c = 0.5 * (g_own - g_other) - 1j * delta

    def shape(t, s):
        x = np.maximum(t - s, 0.0)
        val = np.exp(-0.5 * g_own * x - 1j * delta * s) * x * exprel(c * x)
        return np.where(t - s > 0, val, 0.0)
    return shape


def _sampled_pair_shape(samples: EnvelopeSamples, axis: Axis, g_own: float, g_other: float,
                        delta: float) -> Callable:
    n = axis.size
    tv = axis.values
    z = 0.5 * (g_own - g_other) - 1j * delta
    mat = np.zeros((n, n), dtype=complex)
    for l in range(n):
        first = max(samples.first, l)
        if first > samples.last and l > samples.last:
            # support lies entirely before t_l
            break
        seg = EnvelopeSamples(samples.values, first, samples.last)
        conv = causal_convolve(seg, axis, z)
        lag = tv[l:] - tv[l]
        mat[l:, l] = np.exp(-1j * delta * tv[l] - (0.5 * g_other + 1j * delta) * lag) * conv[l:]
    mat.flags.writeable = False

    def shape(t, s):
        k = np.rint((np.asarray(t) - axis.start) / axis.step).astype(int)
        l = np.rint((np.asarray(s) - axis.start) / axis.step).astype(int)
        if np.any(k < 0) or np.any(k >= n) or np.any(l < 0) or np.any(l >= n):
            raise ConfigurationError("sampled kernels are only defined on grid nodes")
        return mat[k, l]
    shape.matrix = mat
    return shape


def _drive_amplitude(config: ProcessConfig, envelope: Optional[PumpEnvelope]) -> complex:
    """alpha^j of a constant pump after any pump-cavity enhancement."""
    if envelope is None:
        return complex(math.sqrt(config.drive)) ** config.process_order
    amp = complex(envelope.amplitude)
    if config.pump is not None:
        from .pump import cw_intracavity_amplitude
        amp = cw_intracavity_amplitude(amp, config.pump, config.pump_detuning)
    ratio = (abs(amp) ** 2 / config.threshold) ** config.process_order
    if ratio >= 1.0:
        raise AboveThreshold(f"(P/P0)^j = {ratio:.6g} is at or above threshold")
    return amp ** config.process_order


def build_kernels(config: ProcessConfig, envelope: Optional[PumpEnvelope] = None,
                  grid: Optional[Axis] = None, check: bool = True) -> KernelSet:
    """Transform kernels for a constant pump (analytic) or a pulse (sampled on ``grid``).

    With ``envelope=None`` the constant pump implied by ``config`` is used.
    The envelope is the external pump; a pump cavity, when present, is
    applied first.
    """
    sm, im = config.signal, config.idler
    gs, gi, d = config.gamma_s, config.gamma_i, config.delta
    half_g = 0.5 * config.coupling_strength

    U_s = Kernel("U_s", sm.coupling_rate, _response(gs), -1.0, 0.5 * gs)
    U_i = Kernel("U_i", im.coupling_rate, _response(gi), -1.0, 0.5 * gi)
    u_s = Kernel("u_s", math.sqrt(sm.coupling_rate * sm.intrinsic_loss_rate), _response(gs), 0.0, 0.5 * gs)
    u_i = Kernel("u_i", math.sqrt(im.coupling_rate * im.intrinsic_loss_rate), _response(gi), 0.0, 0.5 * gi)

    stationary = envelope is None or isinstance(envelope, CW)
    if stationary:
        amp = _drive_amplitude(config, envelope)
        shape_s = _cw_pair_shape(gs, gi, d)
        shape_i = _cw_pair_shape(gi, gs, d)
        grid_used = None
    else:
        if grid is None:
            raise ConfigurationError("pulsed kernels need a time grid")
        if check:
            from .biphoton import check_time_step
            check_time_step(config, grid)
        from .biphoton import _parametric_envelope
        env = _parametric_envelope(config, envelope, grid)
        samples = env.sample(grid, config.process_order)
        amp = 1.0
        shape_s = _sampled_pair_shape(samples, grid, gs, gi, d)
        shape_i = _sampled_pair_shape(samples, grid, gi, gs, d)
        grid_used = grid

    pair = half_g * amp * math.sqrt(sm.coupling_rate * im.coupling_rate)
    # the conjugate-input loss kernels carry the partner mode's loss rate
    V_s = Kernel("V_s", pair, shape_s, 0.0, 0.5 * gi)
    V_i = Kernel("V_i", pair, shape_i, 0.0, 0.5 * gs)
    v_s = Kernel("v_s", half_g * amp * math.sqrt(sm.coupling_rate * im.intrinsic_loss_rate),
                 shape_s, 0.0, 0.5 * gi)
    v_i = Kernel("v_i", half_g * amp * math.sqrt(im.coupling_rate * sm.intrinsic_loss_rate),
                 shape_i, 0.0, 0.5 * gs)
    return KernelSet(config, U_s, U_i, u_s, u_i, V_s, V_i, v_s, v_i, stationary, grid_used)


# ---------------------------------------------------------------------------
# contractions
# ---------------------------------------------------------------------------

def _gl_nodes(length: float, width: float) -> Tuple[np.ndarray, np.ndarray]:
    nseg = max(1, int(math.ceil(length / width)))
    edges = np.linspace(0.0, length, nseg + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _analytic_nodes(config: ProcessConfig, extra_rate: float = 0.0, decay_lengths: float = 46.0):
    # products of two kernels fall off twice as fast as a single kernel
    gmin = min(config.gamma_s, config.gamma_i)
    gmax = max(config.gamma_s, config.gamma_i)
    length = decay_lengths / gmin
    width = 0.5 / (gmax + abs(config.delta) + extra_rate)
    return _gl_nodes(length, width)


def contract(kernels: KernelSet, a: Kernel, b: Kernel, t, t_prime, conj_first: bool = False):
    """integral ds A(t, s) B(t', s), with A conjugated on request.

    Delta parts of either kernel are applied analytically.  Both kernels
    must vanish for s later than their first argument (causality).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    tp = np.atleast_1d(np.asarray(t_prime, dtype=float)).ravel()
    t, tp = np.broadcast_arrays(t, tp)
    ca = np.conj(a.coefficient) if conj_first else a.coefficient
    result = np.zeros(t.size, dtype=complex)
    if a.delta_coefficient and b.delta_coefficient:
        raise ConfigurationError("product of two delta kernels is not a function")
    if a.delta_coefficient:
        result += a.delta_coefficient * b(tp, t)
    if b.delta_coefficient:
        av = a(t, tp)
        result += b.delta_coefficient * (np.conj(av) if conj_first else av)
    if a.coefficient == 0 or b.coefficient == 0:
        return result
    m = np.minimum(t, tp)
    if kernels.grid is None:
        x, w = _analytic_nodes(kernels.config)
        s = m[:, None] - x[None, :]
        fa = a.shape(t[:, None], s)
        if conj_first:
            fa = np.conj(fa)
        fb = b.shape(tp[:, None], s)
        result += ca * b.coefficient * np.sum(fa * fb * w[None, :], axis=1)
    else:
        axis = kernels.grid
        s = axis.values
        h = axis.step
        mi = np.rint((m - axis.start) / h).astype(int)
        for r in range(t.size):
            top = mi[r]
            ss = s[:top + 1]
            fa = a.shape(np.full(top + 1, t[r]), ss)
            fb = b.shape(np.full(top + 1, tp[r]), ss)
            if conj_first:
                fa = np.conj(fa)
            prod = fa * fb
            acc = h * (prod.sum() - 0.5 * (prod[0] + prod[-1])) if top > 0 else 0.0
            acc += prod[0] / (a.decay_rate + b.decay_rate)   # before the grid start
            result[r] += ca * b.coefficient * acc
    return result


def _shape_out(res, t, tp):
    return res if (np.ndim(t) or np.ndim(tp)) else complex(res[0])


def g1_functions(kernels: KernelSet, t, t_prime) -> Dict[str, np.ndarray]:
    """First-order output correlations.

    ``ss``/``ii``: <a^dag(t) a(t')> of each arm; ``si``: <a_s(t) a_i(t')>.
    """
    k = kernels
    ss = (contract(k, k.V_s, k.V_s, t, t_prime, True) + contract(k, k.v_s, k.v_s, t, t_prime, True))
    ii = (contract(k, k.V_i, k.V_i, t, t_prime, True) + contract(k, k.v_i, k.v_i, t, t_prime, True))
    si = contract(k, k.U_s, k.V_i, t, t_prime) + contract(k, k.u_s, k.v_i, t, t_prime)
    return {name: _shape_out(v, t, t_prime) for name, v in (("ss", ss), ("ii", ii), ("si", si))}


def flux_from_kernels(kernels: KernelSet, t=0.0) -> Tuple[np.ndarray, np.ndarray]:
    k = kernels
    ns = np.real(contract(k, k.V_s, k.V_s, t, t, True) + contract(k, k.v_s, k.v_s, t, t, True))
    ni = np.real(contract(k, k.V_i, k.V_i, t, t, True) + contract(k, k.v_i, k.v_i, t, t, True))
    if np.ndim(t):
        return ns, ni
    return float(ns[0]), float(ni[0])


def flux_out(config: ProcessConfig, envelope: Optional[CW] = None) -> Tuple[float, float]:
    """Output photon fluxes (n_s, n_i) in photons/s for a constant pump."""
    if envelope is not None and not isinstance(envelope, CW):
        raise ConfigurationError("flux_out needs a constant pump; use flux_from_kernels for pulses")
    return flux_from_kernels(build_kernels(config, envelope))


def pair_rate(config: ProcessConfig, delta=None):
    """Closed-form pair generation rate r_si (pairs/s)."""
    d = config.delta if delta is None else np.asarray(delta, dtype=float)
    gs, gi = config.gamma_s, config.gamma_i
    out = config.power_ratio / (1.0 / gs + 1.0 / gi) / (1.0 + np.square(d) / config.gamma_mean**2)
    return out if np.ndim(out) else float(out)


def g2_functions(kernels: KernelSet, t, t_prime=None, zero_level: float = 1e-300
                 ) -> Dict[str, np.ndarray]:
    """Normalized second-order correlations via Gaussian factorization.

    With ``t_prime`` omitted, ``t`` is read as a delay tau and evaluated as
    (0, tau); this only makes sense for stationary kernels.
    """
    if t_prime is None:
        if not kernels.stationary:
            raise ConfigurationError("delay-only evaluation needs stationary (constant-pump) kernels")
        t, t_prime = np.zeros_like(np.asarray(t, dtype=float)), t
    g1 = g1_functions(kernels, t, t_prime)
    ns_t, ni_t = flux_from_kernels(kernels, np.atleast_1d(np.asarray(t, float)))
    ns_p, ni_p = flux_from_kernels(kernels, np.atleast_1d(np.asarray(t_prime, float)))
    for name, val in (("signal", ns_t), ("signal", ns_p), ("idler", ni_t), ("idler", ni_p)):
        if np.any(np.asarray(val) <= zero_level):
            raise ZeroFlux(f"{name} flux vanishes at a requested time")
    out = {
        "ss": 1.0 + np.abs(np.atleast_1d(g1["ss"])) ** 2 / (ns_t * ns_p),
        "ii": 1.0 + np.abs(np.atleast_1d(g1["ii"])) ** 2 / (ni_t * ni_p),
        "si": 1.0 + np.abs(np.atleast_1d(g1["si"])) ** 2 / (ns_t * ni_p),
    }
    if not (np.ndim(t) or np.ndim(t_prime)):
        out = {kk: float(v[0]) for kk, v in out.items()}
    return out


# ---------------------------------------------------------------------------
# frequency domain
# ---------------------------------------------------------------------------

def kernel_transform(kernels: KernelSet, kernel: Kernel, omega, chunk: int = 64):
    """integral dx K(x, 0) exp(i omega x) for a stationary kernel, delta part included."""
    if not kernels.stationary:
        raise ConfigurationError("kernel transforms need constant-pump kernels")
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.full(omega.size, kernel.delta_coefficient, dtype=complex)
    if kernel.coefficient == 0:
        return out
    wmax = float(np.max(np.abs(omega))) if omega.size else 0.0
    x, w = _analytic_nodes(kernels.config, wmax, 64.0)
    vals = kernel.coefficient * kernel.shape(x, np.zeros_like(x)) * w
    for i in range(0, omega.size, chunk):
        o = omega[i:i + chunk]
        out[i:i + chunk] += np.exp(1j * o[:, None] * x[None, :]) @ vals
    return out


def spectra_out(kernels_or_config, omega) -> Tuple[np.ndarray, np.ndarray]:
    """Output spectra (S_s, S_i) with S(w) = integral <a^dag(t) a(t + tau)> e^{i w tau} dtau.

    With this convention the flux is (1/2 pi) * integral S(w) dw.
    """
    k = kernels_or_config if isinstance(kernels_or_config, KernelSet) else build_kernels(kernels_or_config)
    ss = np.abs(kernel_transform(k, k.V_s, omega)) ** 2 + np.abs(kernel_transform(k, k.v_s, omega)) ** 2
    si = np.abs(kernel_transform(k, k.V_i, omega)) ** 2 + np.abs(kernel_transform(k, k.v_i, omega)) ** 2
    if not np.ndim(omega):
        return float(ss[0]), float(si[0])
    return ss, si


def spectra_closed(config: ProcessConfig, omega) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form output spectra with their absolute prefactor."""
    omega = np.asarray(omega, dtype=float)
    gs, gi, d = config.gamma_s, config.gamma_i, config.delta
    r = config.power_ratio
    ss = 4 * config.signal.kappa * r / ((1 + 4 * omega**2 / gs**2) * (1 + 4 * (omega - d) ** 2 / gi**2))
    si = 4 * config.idler.kappa * r / ((1 + 4 * omega**2 / gi**2) * (1 + 4 * (omega - d) ** 2 / gs**2))
    return ss, si


SPECTRUM_FLUX_FACTOR = 1.0 / TWO_PI
"""Flux = SPECTRUM_FLUX_FACTOR * integral S(omega) d omega."""


def commutator_spectrum(kernels: KernelSet, omega, which: str = "signal"):
    """|U(w)|^2 + |u(w)|^2 - |V(w)|^2 - |v(w)|^2; exactly 1 for a canonical map."""
    k = kernels
    names = ("U_s", "u_s", "V_s", "v_s") if which == "signal" else ("U_i", "u_i", "V_i", "v_i")
    U, u, V, v = (kernel_transform(k, k.kernel(n), omega) for n in names)
    out = np.abs(U) ** 2 + np.abs(u) ** 2 - np.abs(V) ** 2 - np.abs(v) ** 2
    return out if np.ndim(omega) else float(out[0])


def commutator_weight(kernels: KernelSet, which: str = "signal") -> float:
    """Total weight integral dt' [a(t), a^dag(t')] of the output commutator.

    Equals the zero-frequency value of :func:`commutator_spectrum`.
    """
    return float(commutator_spectrum(kernels, 0.0, which))


def cross_commutator(kernels: KernelSet, t, t_prime):
    """[a_s(t), a_i(t')] from the kernels."""
    k = kernels
    res = (contract(k, k.U_s, k.V_i, t, t_prime) + contract(k, k.u_s, k.v_i, t, t_prime)
           - contract(k, k.V_s, k.U_i, t, t_prime) - contract(k, k.v_s, k.u_i, t, t_prime))
    return _shape_out(res, t, t_prime)
