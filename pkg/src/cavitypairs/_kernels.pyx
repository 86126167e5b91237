# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.  Signatures and results mirror ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs

cnp.import_array()


def linear_recurrence(x, double complex a, double complex b0, double complex b1,
                      double complex y0=0.0):
    """y[0] = y0; y[k+1] = a*y[k] + b0*x[k] + b1*x[k+1]."""
    cdef const double complex[::1] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef Py_ssize_t n = xv.shape[0], k
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] y = out
    if n == 0:
        return out
    y[0] = y0
    for k in range(n - 1):
        y[k + 1] = a * y[k] + b0 * xv[k] + b1 * xv[k + 1]
    return out


def flux_recurrence(f, double h, double gamma_self, double gamma_other):
    """Trapezoidal double sum of the pulsed-flux kernel at every node.

    out[k] = sum_{a,b<=k} w_a w_b conj(f_a) f_b E_ka E_kb K_ab with
    E_ka = exp(-gamma_self (t_k - t_a)/2), K_ab = exp(-gamma_other |t_a - t_b|/2)
    and trapezoid weights on [t_0, t_k].
    """
    cdef const double complex[::1] fv = np.ascontiguousarray(f, dtype=np.complex128)
    cdef Py_ssize_t n = fv.shape[0], k
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double e_self = exp(-gamma_self * h)
    cdef double e_pair = exp(-0.5 * (gamma_self + gamma_other) * h)
    cdef double complex R = 0.0, u, wf
    cdef double Q = 0.0, w
    for k in range(n):
        if k > 0:
            u = 0.5 * h * fv[k]
            o[k] = Q + (u.real * u.real + u.imag * u.imag) + 2.0 * (u.conjugate() * R).real
            w = h
        else:
            w = 0.5 * h
        wf = w * fv[k]
        Q = e_self * (Q + (wf.real * wf.real + wf.imag * wf.imag) + 2.0 * (wf.conjugate() * R).real)
        R = e_pair * (R + wf)
    return out


def direct_flux_sum(f, double h, double gamma_self, double gamma_other):
    """Literal O(N^2)-per-node evaluation of the same double sum."""
    cdef const double complex[::1] fv = np.ascontiguousarray(f, dtype=np.complex128)
    cdef Py_ssize_t n = fv.shape[0], k, a, b
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    kern_arr = np.exp(-0.5 * gamma_other * h * np.arange(n))
    cdef double[::1] kern = kern_arr
    g_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] g = g_arr
    cdef double complex inner
    cdef double wa, e, tot
    for k in range(1, n):
        for a in range(k + 1):
            wa = h if 0 < a < k else 0.5 * h
            e = exp(-0.5 * gamma_self * h * (k - a))
            g[a] = wa * e * fv[a]
        # symmetric kernel: diagonal plus twice the lower triangle
        tot = 0.0
        for a in range(k + 1):
            inner = 0.5 * kern[0] * g[a]
            for b in range(a):
                inner = inner + kern[a - b] * g[b]
            tot = tot + 2.0 * (g[a].conjugate() * inner).real
        o[k] = tot
    return out


def coincidence_deltas(t_signal, t_idler, double window):
    """All differences t_idler - t_signal with |difference| <= window.

    Both inputs must be sorted ascending.
    """
    cdef const double[::1] ts = np.ascontiguousarray(t_signal, dtype=np.float64)
    cdef const double[::1] ti = np.ascontiguousarray(t_idler, dtype=np.float64)
    cdef Py_ssize_t ns = ts.shape[0], ni = ti.shape[0]
    cdef Py_ssize_t i, j, lo = 0, count = 0
    # first pass counts, second pass fills
    for i in range(ns):
        while lo < ni and ti[lo] < ts[i] - window:
            lo += 1
        j = lo
        while j < ni and ti[j] <= ts[i] + window:
            count += 1
            j += 1
    out = np.empty(count, dtype=np.float64)
    cdef double[::1] o = out
    lo = 0
    count = 0
    for i in range(ns):
        while lo < ni and ti[lo] < ts[i] - window:
            lo += 1
        j = lo
        while j < ni and ti[j] <= ts[i] + window:
            o[count] = ti[j] - ts[i]
            count += 1
            j += 1
    return out
