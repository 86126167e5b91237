"""Inner-loop backend selection.

The compiled extension is used when it has been built; otherwise, or when
``CAVITYPAIRS_PURE_PYTHON`` is set to a non-empty value other than ``0``,
the NumPy/SciPy implementations are used.  Both expose the same functions.
"""
import os

from . import _kernels_py

_force_python = os.environ.get("CAVITYPAIRS_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

linear_recurrence = _impl.linear_recurrence
flux_recurrence = _impl.flux_recurrence
direct_flux_sum = _impl.direct_flux_sum
coincidence_deltas = _impl.coincidence_deltas

__all__ = ["BACKEND", "linear_recurrence", "flux_recurrence", "direct_flux_sum",
           "coincidence_deltas"]
