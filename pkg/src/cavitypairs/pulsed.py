"""Time-dependent fluxes and correlations for arbitrary pump envelopes."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .biphoton import (
    _parametric_envelope,
    diagonal_amplitude,
    jta_columns,
    jta_rows,
)
from .core import Axis, ProcessConfig, PumpEnvelope, Trace
from .errors import ConfigurationError, UnderSampled, ZeroFlux
from .kernels import direct_flux_sum, flux_recurrence


def check_flux_step(config: ProcessConfig, axis: Axis, factor: float = 0.05) -> None:
    rate = max(config.gamma_s, config.gamma_i, config.gamma_mean + abs(config.delta))
    limit = factor / rate
    if axis.step > limit * (1 + 1e-12):
        raise UnderSampled(f"time step {axis.step:g} s exceeds {limit:g} s")


def _pair_flux(config: ProcessConfig, envelope: PumpEnvelope, axis: Axis, which: str,
               delta: float, method: str) -> np.ndarray:
    if which == "signal":
        g_self, g_other = config.gamma_s, config.gamma_i
    elif which == "idler":
        g_self, g_other = config.gamma_i, config.gamma_s
    else:
        raise ConfigurationError(f"which must be 'signal' or 'idler', got {which!r}")
    samples = envelope.sample(axis, config.process_order)
    out = np.zeros(axis.size)
    if samples.empty:
        return out
    i0, i1 = samples.first, samples.last
    f = samples.values[i0:i1 + 1] * np.exp(-1j * delta * axis.values[i0:i1 + 1])
    kernel = flux_recurrence if method == "recursion" else direct_flux_sum
    out[i0:i1 + 1] = kernel(f, axis.step, g_self, g_other)
    if i1 + 1 < axis.size:
        # no drive after the support: the double sum only decays
        out[i1 + 1:] = out[i1] * np.exp(-g_self * axis.step * np.arange(1, axis.size - i1))
    return out * (g_self / (g_self + g_other))


def flux_pulsed(config: ProcessConfig, envelope: PumpEnvelope, grid: Axis,
                which: str = "signal", method: str = "recursion",
                delta_spread: float = 0.0, spread_nodes: int = 21,
                check: bool = True) -> Trace:
    """Photon flux n(t) under an arbitrary pump envelope.

    Normalized so that a constant pump settles to :func:`flux_cw` of the same
    configuration.  The double integral is a trapezoidal sum with half
    weights at both ends of the pump support; ``method="direct"`` evaluates
    the same sum literally, ``"recursion"`` in O(N).

    ``delta_spread`` averages the flux over a Gaussian distribution of
    mismatches with that standard deviation (rad/s) around ``config.delta``.
    """
    if method not in ("recursion", "direct"):
        raise ConfigurationError(f"unknown method {method!r}")
    if check:
        check_flux_step(config, grid)
    env = _parametric_envelope(config, envelope, grid)
    if delta_spread > 0:
        x, w = np.polynomial.hermite_e.hermegauss(spread_nodes)
        w = w / w.sum()
        vals = sum(wk * _pair_flux(config, env, grid, which, config.delta + delta_spread * xk, method)
                   for xk, wk in zip(x, w))
    else:
        vals = _pair_flux(config, env, grid, which, config.delta, method)
    return Trace(grid, vals, f"n_{which[0]}", "arb")


def flux_rect_closed(t, gamma: float, delta: float, tau_p: float):
    """Flux under a rectangular pulse switched on at t = 0, relative to steady state.

    Equal signal and idler linewidths are assumed.
    """
    t = np.asarray(t, dtype=float)

    def phi(x):
        # (gamma/delta) sin(delta x) = gamma x sinc(delta x / pi)
        return 1.0 - np.exp(-gamma * x) * (np.cos(delta * x) + gamma * x * np.sinc(delta * x / math.pi))

    inside = phi(np.clip(t, 0.0, tau_p))
    after = phi(tau_p) * np.exp(-gamma * np.clip(t - tau_p, 0.0, None))
    out = np.where(t < 0, 0.0, np.where(t <= tau_p, inside, after))
    return out if out.ndim else float(out)


def _node_indices(axis: Axis, t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.array([axis.index_of(x) for x in t.ravel()]).reshape(t.shape)


def xcorr_pulsed(config: ProcessConfig, envelope: PumpEnvelope, t, t_prime, grid: Axis,
                 check: bool = True):
    """|Psi(t, t')|^2 scaled so a constant pump gives a two-sided exponential of peak 1.

    The scale is the constant-pump peak at the envelope's peak drive.
    ``t`` and ``t_prime`` must be grid nodes.
    """
    if check:
        check_flux_step(config, grid)
    diag = diagonal_amplitude(config, envelope, grid)
    k = _node_indices(grid, t)
    l = _node_indices(grid, t_prime)
    k, l = np.broadcast_arrays(k, l)
    lo = np.minimum(k, l)
    lag = np.abs(l - k) * grid.step
    rate = np.where(k <= l, config.gamma_i, config.gamma_s)
    psi2 = np.abs(diag[lo]) ** 2 * np.exp(-rate * lag)
    out = psi2 * (config.gamma_mean**2 + config.delta**2) / _peak_drive(config, envelope, grid)
    return out if np.ndim(t) or np.ndim(t_prime) else float(out.ravel()[0])


def _peak_drive(config: ProcessConfig, envelope: PumpEnvelope, grid: Axis) -> float:
    env = _parametric_envelope(config, envelope, grid)
    p = env.peak_power() ** config.process_order
    if p == 0:
        raise ZeroFlux("pump envelope is identically zero")
    return p


def acorr_pulsed(config: ProcessConfig, envelope: PumpEnvelope, t, t_prime, grid: Axis,
                 which: str = "signal", check: bool = True, zero_level: float = 1e-12):
    """Normalized g2 of one arm between detection times ``t`` and ``t_prime``.

    The coherence integral runs over the partner's detection time on the
    grid (trapezoid) plus the exact exponential tail beyond the grid end.
    """
    if check:
        check_flux_step(config, grid)
    diag = diagonal_amplitude(config, envelope, grid)
    k = np.atleast_1d(_node_indices(grid, t)).ravel()
    l = np.atleast_1d(_node_indices(grid, t_prime)).ravel()
    k, l = np.broadcast_arrays(k, l)
    if which == "signal":
        pick, tail_rate = jta_rows, config.gamma_i
    elif which == "idler":
        pick, tail_rate = jta_columns, config.gamma_s
    else:
        raise ConfigurationError(f"which must be 'signal' or 'idler', got {which!r}")
    w = np.full(grid.size, grid.step)
    w[0] = w[-1] = 0.5 * grid.step

    nodes = np.unique(np.concatenate([k, l]))
    rows = pick(config, diag, grid, nodes)
    index = {int(n): r for r, n in enumerate(nodes)}
    flux = (np.abs(rows) ** 2) @ w + np.abs(rows[:, -1]) ** 2 / tail_rate

    # reference level: the largest flux anywhere on the grid
    scale = (np.abs(diag) ** 2).max() * (1.0 / config.gamma_s + 1.0 / config.gamma_i)
    out = np.empty(k.size)
    for m, (a, b) in enumerate(zip(k, l)):
        ra, rb = index[int(a)], index[int(b)]
        na, nb = flux[ra], flux[rb]
        if scale == 0 or min(na, nb) < zero_level * scale:
            raise ZeroFlux(f"flux vanishes at t = {grid.values[a if na <= nb else b]:g} s")
        g1 = np.sum(np.conj(rows[ra]) * rows[rb] * w) + np.conj(rows[ra, -1]) * rows[rb, -1] / tail_rate
        out[m] = 1.0 + abs(g1) ** 2 / (na * nb)
    return out if np.ndim(t) or np.ndim(t_prime) else float(out[0])
