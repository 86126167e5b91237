"""NumPy/SciPy implementations of the compiled inner loops."""
import numpy as np
from scipy.signal import lfilter


def linear_recurrence(x, a, b0, b1, y0=0.0):
    """y[0] = y0; y[k+1] = a*y[k] + b0*x[k] + b1*x[k+1]."""
    x = np.ascontiguousarray(x, dtype=complex)
    n = x.size
    out = np.empty(n, dtype=complex)
    if n == 0:
        return out
    out[0] = y0
    if n > 1:
        drive = b0 * x[:-1] + b1 * x[1:]
        zi = np.array([a * y0], dtype=complex)
        out[1:], _ = lfilter([1.0], [1.0, -a], drive, zi=zi)
    return out


def flux_recurrence(f, h, gamma_self, gamma_other):
    f = np.ascontiguousarray(f, dtype=complex)
    n = f.size
    out = np.zeros(n)
    if n < 2:
        return out
    e_self = np.exp(-gamma_self * h)
    e_pair = np.exp(-0.5 * (gamma_self + gamma_other) * h)
    w = np.full(n, h)
    w[0] = 0.5 * h
    wf = w * f
    # R[k] = sum_{b<k} wf_b e_pair^(k-b)
    R = np.zeros(n, dtype=complex)
    R[1:] = lfilter([e_pair], [1.0, -e_pair], wf[:-1])
    drive = np.abs(wf) ** 2 + 2.0 * np.real(np.conj(wf) * R)
    Q = np.zeros(n)
    Q[1:] = lfilter([e_self], [1.0, -e_self], drive[:-1])
    u = 0.5 * h * f[1:]
    out[1:] = Q[1:] + np.abs(u) ** 2 + 2.0 * np.real(np.conj(u) * R[1:])
    return out


def direct_flux_sum(f, h, gamma_self, gamma_other):
    f = np.ascontiguousarray(f, dtype=complex)
    n = f.size
    out = np.zeros(n)
    idx = np.arange(n)
    kern = np.exp(-0.5 * gamma_other * h * np.abs(idx[:, None] - idx[None, :]))
    for k in range(1, n):
        w = np.full(k + 1, h)
        w[0] = w[-1] = 0.5 * h
        g = w * np.exp(-0.5 * gamma_self * h * (k - idx[:k + 1])) * f[:k + 1]
        out[k] = np.real(np.conj(g) @ kern[:k + 1, :k + 1] @ g)
    return out


def coincidence_deltas(t_signal, t_idler, window):
    ts = np.ascontiguousarray(t_signal, dtype=float)
    ti = np.ascontiguousarray(t_idler, dtype=float)
    lo = np.searchsorted(ti, ts - window, side="left")
    hi = np.searchsorted(ti, ts + window, side="right")
    counts = hi - lo
    total = int(counts.sum())
    if total == 0:
        return np.empty(0)
    owner = np.repeat(np.arange(ts.size), counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return ti[lo[owner] + offsets] - ts[owner]
