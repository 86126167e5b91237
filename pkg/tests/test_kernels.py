"""The compiled and pure-Python inner loops must agree."""
import numpy as np
import pytest

from cavitypairs import _kernels_py as py
from cavitypairs import kernels

compiled = pytest.importorskip("cavitypairs._kernels")


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def test_selected_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_linear_recurrence(rng):
    x = rng.standard_normal(1000) + 1j * rng.standard_normal(1000)
    args = (0.97 + 0.05j, 0.3 - 0.1j, 0.25, 0.1j)
    a, b = compiled.linear_recurrence(x, *args), py.linear_recurrence(x, *args)
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))
    naive = np.empty_like(x)
    naive[0] = args[3]
    for k in range(x.size - 1):
        naive[k + 1] = args[0] * naive[k] + args[1] * x[k] + args[2] * x[k + 1]
    assert np.allclose(a, naive, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("gs,go", [(1.0, 1.0), (1.0, 0.3), (0.2, 2.0)])
def test_flux_sums(rng, gs, go):
    f = rng.standard_normal(300) + 1j * rng.standard_normal(300)
    for fn in ("flux_recurrence", "direct_flux_sum"):
        a = getattr(compiled, fn)(f, 0.01, gs, go)
        b = getattr(py, fn)(f, 0.01, gs, go)
        assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))
    rec, direct = py.flux_recurrence(f, 0.01, gs, go), py.direct_flux_sum(f, 0.01, gs, go)
    assert np.max(np.abs(rec - direct)) <= 1e-12 * np.max(np.abs(direct))


def test_coincidence_deltas(rng):
    ts = np.sort(rng.uniform(0, 1.0, 2000))
    ti = np.sort(rng.uniform(0, 1.0, 2000))
    a, b = compiled.coincidence_deltas(ts, ti, 0.01), py.coincidence_deltas(ts, ti, 0.01)
    assert np.array_equal(np.sort(a), np.sort(b))
    brute = (ti[None, :] - ts[:, None]).ravel()
    brute = brute[np.abs(brute) <= 0.01]
    assert np.allclose(np.sort(a), np.sort(brute))


def test_readonly_inputs_accepted():
    x = np.linspace(0, 1, 10) + 0j
    x.flags.writeable = False
    compiled.linear_recurrence(x, 0.5, 0.5, 0.5)
    t = np.linspace(0, 1, 10)
    t.flags.writeable = False
    compiled.coincidence_deltas(t, t, 0.1)
