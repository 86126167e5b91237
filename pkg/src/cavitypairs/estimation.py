"""Curve fits and frequency-mismatch estimation from sweep data."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import TWO_PI, Axis, ProcessConfig, Trace, require_pump
from .errors import ConfigurationError, DegenerateData, NoConvergence, ShallowDip
from .lm import covariance, levenberg_marquardt


@dataclass(frozen=True)
class FitResult:
    names: Tuple[str, ...]
    values: Tuple[float, ...]
    uncertainties: Tuple[float, ...]
    rss: float
    iterations: int
    converged: bool
    gradient_measure: float = 0.0
    history: Tuple[float, ...] = ()
    extra: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if any(u < 0 for u in self.uncertainties if not math.isnan(u)):
            raise ValueError("uncertainties must be non-negative")

    def __getitem__(self, name: str) -> float:
        return self.values[self.names.index(name)]

    def uncertainty(self, name: str) -> float:
        return self.uncertainties[self.names.index(name)]

    def as_dict(self) -> dict:
        doc = {
            "parameters": {n: {"value": v, "uncertainty": u}
                           for n, v, u in zip(self.names, self.values, self.uncertainties)},
            "rss": self.rss,
            "iterations": self.iterations,
            "converged": self.converged,
            "gradient_measure": self.gradient_measure,
        }
        doc.update({k: v for k, v in self.extra.items()})
        return doc

    def report(self) -> str:
        lines = []
        for n, v, u in zip(self.names, self.values, self.uncertainties):
            lines.append(f"{n} = {v:.12g}")
            lines.append(f"{n}_uncertainty = {u:.6g}")
        for k, v in self.extra.items():
            lines.append(f"{k} = {v:.12g}" if isinstance(v, float) else f"{k} = {v}")
        lines += [f"rss = {self.rss:.6g}", f"iterations = {self.iterations}",
                  f"converged = {str(self.converged).lower()}"]
        return "\n".join(lines) + "\n"


def _rounding_floor(v: np.ndarray) -> float:
    """Cost of residuals a few hundred ulps of the (unit-scaled) data."""
    return v.size * (256 * np.finfo(float).eps * max(float(np.max(np.abs(v))), 1.0)) ** 2


def _finish(names, outcome, x_scale, y_scale, transform, require: bool, extra=None) -> FitResult:
    if require and not outcome.converged:
        raise NoConvergence(f"fit did not converge ({outcome.message}, "
                            f"gradient measure {outcome.gradient_measure:.3g})")
    cov = covariance(outcome)
    values, sig = transform(outcome.params, np.sqrt(np.clip(np.diag(cov), 0, None)))
    return FitResult(tuple(names), tuple(float(v) for v in values), tuple(float(s) for s in sig),
                     float(outcome.cost * y_scale**2), outcome.iterations, outcome.converged,
                     outcome.gradient_measure, tuple(c * y_scale**2 for c in outcome.history),
                     dict(extra or {}))


# ---------------------------------------------------------------------------
# Lorentzian
# ---------------------------------------------------------------------------

def lorentzian(x, center, fwhm, amplitude, offset=0.0, inverted=False):
    x = np.asarray(x, dtype=float)
    shape = 1.0 / (1.0 + 4.0 * ((x - center) / fwhm) ** 2)
    return offset + (-amplitude if inverted else amplitude) * shape


def _half_width_scan(x, y, i_peak, level):
    """Distance between the level crossings on both sides of ``i_peak``."""
    left = i_peak
    while left > 0 and y[left] > level:
        left -= 1
    right = i_peak
    while right < len(y) - 1 and y[right] > level:
        right += 1
    return max(x[right] - x[left], 2 * float(np.min(np.diff(x))))


def fit_lorentzian(trace: Trace, inverted: bool = False, offset: Optional[float] = None,
                   require_convergence: bool = True) -> FitResult:
    """Least-squares Lorentzian; parameters center, fwhm, amplitude, offset.

    ``inverted`` fits a dip ``offset - amplitude*L``.  A numeric ``offset``
    holds the baseline fixed at that value.
    """
    return fit_lorentzian_points(trace.x, trace.values, inverted, offset, require_convergence)


def fit_lorentzian_points(x, y, inverted: bool = False, offset: Optional[float] = None,
                          require_convergence: bool = True) -> FitResult:
    """:func:`fit_lorentzian` for ascending, not necessarily uniform, abscissae."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 8:
        raise DegenerateData("need at least 8 samples")
    ptp = float(np.ptp(y))
    if not np.all(np.isfinite(y)) or ptp <= 1e-12 * max(float(np.max(np.abs(y))), 1e-300):
        raise DegenerateData("trace is flat")
    xc, xs = 0.5 * (x[0] + x[-1]), 0.5 * (x[-1] - x[0])
    u = (x - xc) / xs
    v = y / ptp
    sgn = -1.0 if inverted else 1.0
    w = sgn * v
    i = int(np.argmax(w))
    edge = np.concatenate([w[: max(2, x.size // 10)], w[-max(2, x.size // 10):]])
    base = float(np.median(edge)) if offset is None else sgn * offset / ptp
    amp = w[i] - base
    width = _half_width_scan(u, w, i, base + 0.5 * amp)
    fixed = offset is not None

    def model_parts(p):
        c, f, a = p[:3]
        b = base if fixed else p[3]
        q = (u - c) / f
        L = 1.0 / (1.0 + 4.0 * q * q)
        return c, f, a, b, q, L

    def residual(p):
        c, f, a, b, q, L = model_parts(p)
        return b + a * L - w

    def jac(p):
        c, f, a, b, q, L = model_parts(p)
        dL = -8.0 * q * L * L          # dL/dq
        cols = [a * dL * (-1.0 / f), a * dL * (-q / f), L]
        if not fixed:
            cols.append(np.ones_like(u))
        return np.column_stack(cols)

    p0 = [u[i], width, amp] + ([] if fixed else [base])
    out = levenberg_marquardt(residual, jac, p0, cost_floor=_rounding_floor(v))

    def transform(p, s):
        vals = [xc + xs * p[0], xs * abs(p[1]), ptp * p[2], offset if fixed else sgn * ptp * p[3]]
        sig = [xs * s[0], xs * s[1], ptp * s[2], 0.0 if fixed else ptp * s[3]]
        return vals, sig

    return _finish(("center", "fwhm", "amplitude", "offset"), out, xs, ptp, transform,
                   require_convergence)


# ---------------------------------------------------------------------------
# two-sided exponential
# ---------------------------------------------------------------------------

def _polish_at_kink(out, residual, jac, u: np.ndarray, cost_floor: float):
    """Handle a stall with the peak on a sample, where the model has a kink.

    The cost is not differentiable in the peak position there, so the smooth
    gradient test cannot pass.  The peak is pinned, the other parameters are
    refined, and the result counts as converged when they pass the gradient
    test and the cost rises for small moves of the peak either way.
    """
    c = float(out.params[0])
    du = float(np.min(np.abs(np.diff(u))))
    if np.min(np.abs(u - c)) > 1e-9 * du:
        return out
    inner = levenberg_marquardt(lambda q: residual(np.r_[c, q]), lambda q: jac(np.r_[c, q])[:, 1:],
                                out.params[1:], cost_floor=cost_floor)
    p = np.r_[c, inner.params]
    cost = inner.cost
    ok = inner.converged
    for eps in (1e-7 * du, -1e-7 * du):
        r = residual(np.r_[c + eps, inner.params])
        ok = ok and float(r @ r) >= cost
    if not ok or cost > out.cost:
        return out
    return replace(out, params=p, cost=cost, jacobian=jac(p), residuals=residual(p), converged=True,
                   iterations=out.iterations + inner.iterations, gradient_measure=inner.gradient_measure,
                   history=list(out.history) + list(inner.history[1:]),
                   message="minimum at a sample-aligned peak")


def double_exponential(tau, peak_position, decay_left, decay_right, amplitude, background=0.0):
    tau = np.asarray(tau, dtype=float)
    d = tau - peak_position
    return background + amplitude * np.where(d < 0, np.exp(np.minimum(d, 0) / decay_left),
                                             np.exp(-np.maximum(d, 0) / decay_right))


def fit_double_exponential(histogram: Trace, symmetric: bool = False,
                           background: Optional[float] = None,
                           require_convergence: bool = True) -> FitResult:
    """Fit ``background + A exp(-|tau - tau0|/t_side)`` with separate or tied sides."""
    x = np.asarray(histogram.x, dtype=float)
    y = np.asarray(histogram.values, dtype=float)
    if x.size < 8:
        raise DegenerateData("need at least 8 bins")
    ptp = float(np.ptp(y))
    if ptp <= 0:
        raise DegenerateData("histogram is flat")
    xs = float(x[-1] - x[0]) / 2
    xc = float(x[0] + x[-1]) / 2
    u = (x - xc) / xs
    v = y / ptp
    i = int(np.argmax(v))
    k = max(2, x.size // 10)
    base = float(np.median(np.concatenate([v[:k], v[-k:]]))) if background is None else background / ptp
    amp = v[i] - base
    level = base + amp / math.e
    left = i
    while left > 0 and v[left] > level:
        left -= 1
    right = i
    while right < v.size - 1 and v[right] > level:
        right += 1
    du = u[1] - u[0]
    tl0, tr0 = max(u[i] - u[left], du), max(u[right] - u[i], du)
    fixed_bg = background is not None

    def unpack(p):
        c = p[0]
        if symmetric:
            tl = tr = p[1]
            a = p[2]
            b = base if fixed_bg else p[3]
        else:
            tl, tr, a = p[1], p[2], p[3]
            b = base if fixed_bg else p[4]
        return c, tl, tr, a, b

    def residual(p):
        c, tl, tr, a, b = unpack(p)
        d = u - c
        e = np.where(d < 0, np.exp(np.minimum(d, 0) / tl), np.exp(-np.maximum(d, 0) / tr))
        return b + a * e - v

    def jac(p):
        c, tl, tr, a, b = unpack(p)
        d = u - c
        neg = d < 0
        e = np.where(neg, np.exp(np.minimum(d, 0) / tl), np.exp(-np.maximum(d, 0) / tr))
        dc = np.where(neg, -a * e / tl, a * e / tr)
        dtl = np.where(neg, -a * e * d / tl**2, 0.0)
        dtr = np.where(neg, 0.0, a * e * d / tr**2)
        cols = [dc] + ([dtl + dtr] if symmetric else [dtl, dtr]) + [e]
        if not fixed_bg:
            cols.append(np.ones_like(u))
        return np.column_stack(cols)

    p0 = [u[i]] + ([0.5 * (tl0 + tr0)] if symmetric else [tl0, tr0]) + [amp] + ([] if fixed_bg else [base])
    out = levenberg_marquardt(residual, jac, p0, cost_floor=_rounding_floor(v))
    if not out.converged:
        out = _polish_at_kink(out, residual, jac, u, _rounding_floor(v))

    def transform(p, s):
        if symmetric:
            c, t, a = p[:3]
            sc, st, sa = s[:3]
            b, sb = (base, 0.0) if fixed_bg else (p[3], s[3])
            return ([xc + xs * c, xs * abs(t), xs * abs(t), ptp * a, ptp * b],
                    [xs * sc, xs * st, xs * st, ptp * sa, ptp * sb])
        c, tl, tr, a = p[:4]
        b, sb = (base, 0.0) if fixed_bg else (p[4], s[4])
        return ([xc + xs * c, xs * abs(tl), xs * abs(tr), ptp * a, ptp * b],
                [xs * s[0], xs * s[1], xs * s[2], ptp * s[3], ptp * sb])

    return _finish(("peak_position", "decay_time_left", "decay_time_right", "amplitude", "background"),
                   out, xs, ptp, transform, require_convergence)


# ---------------------------------------------------------------------------
# mismatch estimation from a pump-frequency sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRecord:
    """Counts and pump reflection versus pump detuning (rad/s)."""

    counts: Trace
    reflection: Trace
    reflection_tolerance: float = 0.3

    def __post_init__(self):
        if not self.counts.axis.compatible(self.reflection.axis):
            raise ConfigurationError("counts and reflection must share an axis")
        if np.any(np.asarray(self.counts.values) < 0):
            raise ConfigurationError("count rates must be non-negative")
        r = np.asarray(self.reflection.values)
        if np.any(r < -self.reflection_tolerance) or np.any(r > 1 + self.reflection_tolerance):
            raise ConfigurationError("reflection ratio outside [0, 1] beyond the noise allowance")

    @property
    def axis(self) -> Axis:
        return self.counts.axis

    @property
    def pump_detuning(self) -> np.ndarray:
        return self.axis.values

    @classmethod
    def from_arrays(cls, pump_detuning, counts, reflection) -> "SweepRecord":
        ax = Axis.from_values(pump_detuning, "delta_p", "rad/s")
        return cls(Trace(ax, counts, "counts", "1/s"), Trace(ax, reflection, "P_out/P_in", ""))


def _noise_floor(y: np.ndarray) -> float:
    d2 = np.diff(y, 2)
    if d2.size == 0:
        return 0.0
    return 1.4826 * float(np.median(np.abs(d2 - np.median(d2)))) / math.sqrt(6.0)


def _smooth(y: np.ndarray, width: int = 5) -> np.ndarray:
    if y.size < width:
        return y.copy()
    pad = width // 2
    yp = np.pad(y, pad, mode="edge")
    return np.median(np.lib.stride_tricks.sliding_window_view(yp, width), axis=1)


def estimate_mismatch(sweep: SweepRecord, gamma_si: float, process_order: int = 1,
                      window: float = 3.0, require_convergence: bool = True) -> FitResult:
    """Recover the mismatch at zero pump detuning from a pump-frequency sweep.

    Counts are divided by the intracavity pump level 1 - P_out/P_in (to the
    process order), a Lorentzian is fitted within ``window``*gamma_si of the
    normalized maximum, and the mismatch is minus the fitted centre.
    """
    dp = sweep.pump_detuning
    counts = np.asarray(sweep.counts.values, dtype=float)
    refl = np.asarray(sweep.reflection.values, dtype=float)
    if not np.any(counts > 0):
        raise DegenerateData("no counts in the sweep")
    sigma = _noise_floor(refl)
    baseline = float(np.percentile(refl, 90))
    depth = baseline - float(np.min(_smooth(refl)))
    if depth < 5.0 * sigma or depth <= 0:
        raise ShallowDip(f"reflection dip depth {depth:.3g} is below 5x noise floor {sigma:.3g}")
    level = 1.0 - refl
    usable = level > max(3.0 * sigma, 1e-9 * depth)
    norm = np.zeros_like(counts)
    norm[usable] = counts[usable] / level[usable] ** process_order
    peak = int(np.argmax(_smooth(np.where(usable, norm, 0.0))))
    sel = usable & (np.abs(dp - dp[peak]) <= window * gamma_si)
    idx = np.nonzero(sel)[0]
    if idx.size < 8:
        raise DegenerateData("too few usable points around the normalized maximum")
    fit = fit_lorentzian_points(dp[idx], norm[idx], offset=0.0,
                                require_convergence=require_convergence)
    center, fwhm = fit["center"], fit["fwhm"]
    extra = {"fwhm_expected": 2.0 * gamma_si, "fwhm_ratio": fwhm / (2.0 * gamma_si),
             "noise_floor": sigma, "dip_depth": depth}
    return FitResult(("delta0", "fwhm_check", "amplitude"),
                     (-center, fwhm, fit["amplitude"]),
                     (fit.uncertainty("center"), fit.uncertainty("fwhm"), fit.uncertainty("amplitude")),
                     fit.rss, fit.iterations, fit.converged, fit.gradient_measure, fit.history, extra)


DEFAULT_TEMPERATURE_COEFFICIENT = TWO_PI * -14.4e6 / 1e-3
"""Mismatch tuning in rad/s per kelvin (-14.4 MHz per mK)."""


def temperature_to_mismatch(delta_temperature, coefficient: float = DEFAULT_TEMPERATURE_COEFFICIENT):
    out = coefficient * np.asarray(delta_temperature, dtype=float)
    return out if np.ndim(out) else float(out)


def synthetic_sweep(config: ProcessConfig, pump_detuning, noise: float = 0.0, rng=None,
                    peak_counts: float = 1.0e4) -> SweepRecord:
    """Sweep generated from the triply resonant rate law and the reflection dip.

    ``noise`` is the standard deviation of independent multiplicative Gaussian
    noise applied to both the counts and the reflection ratio.
    """
    from .cw import flux_triply_resonant
    from .pump import reflected_power_ratio
    pump = require_pump(config)
    dp = np.asarray(pump_detuning, dtype=float)
    rate = np.asarray(flux_triply_resonant(config, dp), dtype=float)
    counts = peak_counts * rate / rate.max()
    refl = np.asarray(reflected_power_ratio(pump.kappa, pump.linewidth_total, dp), dtype=float)
    if noise > 0:
        rng = np.random.default_rng(rng)
        counts = counts * (1.0 + noise * rng.standard_normal(dp.size))
        refl = refl * (1.0 + noise * rng.standard_normal(dp.size))
        counts = np.clip(counts, 0.0, None)
    return SweepRecord.from_arrays(dp, counts, refl)


SWEEP_COLUMNS = ("delta_p_hz", "counts_per_s", "reflection_ratio")


def write_sweep_csv(sweep: SweepRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for a, b, c in zip(sweep.pump_detuning / TWO_PI, sweep.counts.values, sweep.reflection.values):
            w.writerow([repr(float(a)), repr(float(b)), repr(float(c))])


def read_sweep_csv(path) -> SweepRecord:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header = [h.strip() for h in rows[0]]
    try:
        cols = [header.index(c) for c in SWEEP_COLUMNS]
    except ValueError as exc:
        raise ConfigurationError(f"sweep CSV needs columns {', '.join(SWEEP_COLUMNS)}") from exc
    data = np.array([[float(r[i]) for i in cols] for r in rows[1:]])
    if data.shape[0] < 2:
        raise ConfigurationError("sweep CSV has fewer than two rows")
    return SweepRecord.from_arrays(TWO_PI * data[:, 0], data[:, 1], data[:, 2])
