"""Monte Carlo detection events for photon pairs and their coincidence histograms."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple

import numpy as np

from .core import Axis, ProcessConfig, Trace
from .errors import ConfigurationError, PairOverlapWarning
from .kernels import coincidence_deltas

RNG_ALGORITHM = "PCG64 via numpy.random.default_rng(SeedSequence)"


@dataclass(frozen=True)
class EventRecord:
    """Sorted detection timestamps per channel (seconds), stored column-wise."""

    signal: np.ndarray
    idler: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("signal", "idler"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 1:
                raise ConfigurationError("timestamps must be one-dimensional")
            if a.size and (a[0] < 0 or np.any(np.diff(a) < 0)):
                raise ConfigurationError(f"{name} timestamps must be non-negative and sorted")
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    def __len__(self) -> int:
        return self.signal.size + self.idler.size

    def __iter__(self) -> Iterator[Tuple[str, float]]:
        """(channel, timestamp) pairs in time order."""
        ch = np.concatenate([np.zeros(self.signal.size, int), np.ones(self.idler.size, int)])
        ts = np.concatenate([self.signal, self.idler])
        order = np.argsort(ts, kind="stable")
        names = ("signal", "idler")
        for c, t in zip(ch[order], ts[order]):
            yield names[c], float(t)


def delay_density(tau, gamma_s: float, gamma_i: float):
    """Normalized density of t_idler - t_signal."""
    tau = np.asarray(tau, dtype=float)
    norm = gamma_s * gamma_i / (gamma_s + gamma_i)
    return norm * np.where(tau < 0, np.exp(gamma_s * np.minimum(tau, 0)),
                           np.exp(-gamma_i * np.maximum(tau, 0)))


def delay_cdf(tau, gamma_s: float, gamma_i: float):
    tau = np.asarray(tau, dtype=float)
    p_neg = gamma_i / (gamma_s + gamma_i)
    return np.where(tau < 0, p_neg * np.exp(gamma_s * np.minimum(tau, 0)),
                    p_neg + (1 - p_neg) * -np.expm1(-gamma_i * np.maximum(tau, 0)))


def sample_delays(gamma_s: float, gamma_i: float, size: int, rng) -> np.ndarray:
    """Idler-minus-signal delays from the two-sided exponential law."""
    rng = np.random.default_rng(rng)
    negative = rng.random(size) < gamma_i / (gamma_s + gamma_i)
    mag = rng.standard_exponential(size)
    return np.where(negative, -mag / gamma_s, mag / gamma_i)


def sample_pairs(config: ProcessConfig, pair_rate: float, duration: float,
                 efficiency_s: float = 1.0, efficiency_i: float = 1.0, seed=None,
                 accidental_rate_s: float = 0.0, accidental_rate_i: float = 0.0) -> EventRecord:
    """Poissonian pair births with correlated idler delays and per-channel losses.

    Idler detections falling outside [0, duration] are discarded.  Optional
    accidentals are independent Poisson processes added to each channel.
    """
    for name, eff in (("efficiency_s", efficiency_s), ("efficiency_i", efficiency_i)):
        if not 0.0 <= eff <= 1.0:
            raise ConfigurationError(f"{name} must lie in [0, 1]")
    if pair_rate < 0 or duration <= 0 or accidental_rate_s < 0 or accidental_rate_i < 0:
        raise ConfigurationError("rates must be non-negative and duration positive")
    gs, gi = config.gamma_s, config.gamma_i
    overlap = pair_rate * (1.0 / gs + 1.0 / gi)
    if overlap >= 0.1:
        warnings.warn(f"pair overlap parameter {overlap:.3g} >= 0.1", PairOverlapWarning, stacklevel=2)
    ss = np.random.SeedSequence(seed)
    rng = np.random.default_rng(ss)
    n = rng.poisson(pair_rate * duration)
    births = np.sort(rng.uniform(0.0, duration, n))
    delays = sample_delays(gs, gi, n, rng)
    keep_s = rng.random(n) < efficiency_s
    keep_i = rng.random(n) < efficiency_i
    sig = births[keep_s]
    idl = births[keep_i] + delays[keep_i]
    idl = idl[(idl >= 0) & (idl <= duration)]
    if accidental_rate_s > 0:
        sig = np.concatenate([sig, rng.uniform(0, duration, rng.poisson(accidental_rate_s * duration))])
    if accidental_rate_i > 0:
        idl = np.concatenate([idl, rng.uniform(0, duration, rng.poisson(accidental_rate_i * duration))])
    meta = {"rng": RNG_ALGORITHM, "seed": "" if seed is None else str(seed),
            "entropy": str(ss.entropy), "pairs_generated": int(n)}
    return EventRecord(np.sort(sig), np.sort(idl), meta)


def coincidence_histogram(events: EventRecord, bin_width: float, window: float) -> Trace:
    """Counts of t_idler - t_signal in bins centred on multiples of ``bin_width``.

    The axis runs symmetrically from -K*bin_width to +K*bin_width with
    K = floor(window/bin_width).
    """
    if not bin_width > 0:
        raise ConfigurationError("bin width must be positive")
    if not window > 0:
        raise ConfigurationError("window must be positive")
    k = int(np.floor(window / bin_width + 1e-9))
    edge = (k + 0.5) * bin_width
    d = coincidence_deltas(events.signal, events.idler, edge)
    idx = np.floor(d / bin_width + 0.5).astype(np.int64) + k
    idx = idx[(idx >= 0) & (idx <= 2 * k)]
    counts = np.bincount(idx, minlength=2 * k + 1).astype(float)
    axis = Axis(-k * bin_width, bin_width, 2 * k + 1, "tau", "s")
    return Trace(axis, counts, "coincidences", "counts")


def write_events_csv(events: EventRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["channel", "timestamp_s"])
        for ch, t in events:
            w.writerow([ch, repr(t)])


def read_events_csv(path) -> EventRecord:
    sig, idl = [], []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for row in r:
            (sig if row[0] == "signal" else idl).append(float(row[1]))
    return EventRecord(np.sort(sig), np.sort(idl))
