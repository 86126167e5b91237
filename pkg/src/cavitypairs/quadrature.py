"""Causal exponential convolutions on uniform grids.

``y(t) = integral_{t_first}^{t} exp(-z (t - s)) x(s) ds`` with ``x`` linear
between nodes.  The exponential is integrated exactly over every cell, so
constant and linear inputs are reproduced to rounding error regardless of
how large ``|z| * step`` is.
"""
import cmath

import numpy as np

from .core import Axis, EnvelopeSamples
from .kernels import linear_recurrence


def exp_cell_weights(z: complex, h: float):
    """Return (decay, w_left, w_right) for one cell of width ``h``."""
    q = complex(z) * h
    decay = cmath.exp(-q)
    if abs(q) < 1e-3:
        w_left = h * (0.5 - q / 3 + q * q / 8 - q**3 / 30 + q**4 / 144)
        w_right = h * (0.5 - q / 6 + q * q / 24 - q**3 / 120 + q**4 / 720)
    else:
        w_left = h * (1.0 - decay * (1.0 + q)) / (q * q)
        w_right = h * (q - 1.0 + decay) / (q * q)
    return decay, w_left, w_right


def causal_convolve(samples: EnvelopeSamples, axis: Axis, z: complex) -> np.ndarray:
    """Exponentially weighted running integral of ``samples`` on ``axis``."""
    out = np.zeros(axis.size, dtype=complex)
    if samples.empty:
        return out
    i0, i1 = samples.first, samples.last
    decay, w0, w1 = exp_cell_weights(z, axis.step)
    out[i0:i1 + 1] = linear_recurrence(samples.values[i0:i1 + 1], decay, w0, w1, 0.0)
    if i1 + 1 < axis.size:
        k = np.arange(1, axis.size - i1)
        out[i1 + 1:] = out[i1] * np.exp(-complex(z) * axis.step * k)
    return out


def exprel(z):
    """(exp(z) - 1)/z for complex arguments, exact limit 1 at z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-5
    zs = np.where(small, 1.0, z)
    big = np.expm1(zs) / zs
    series = 1.0 + z / 2 + z * z / 6 + z**3 / 24
    return np.where(small, series, big)


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    if n:
        w[0] = w[-1] = 0.5 * h
    return w
