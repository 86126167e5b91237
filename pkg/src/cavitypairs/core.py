"""Domain types shared by every computation.

All angular frequencies are in rad/s, times in seconds, pump drive in W
(doubly resonant) or J (triply resonant).  Complex amplitudes follow the
e^{-i omega t} convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    AboveThreshold,
    BadProcessOrder,
    ConfigurationError,
    GridMismatch,
    InvalidLinewidth,
    MissingPumpMode,
    NonUniformGrid,
)

TWO_PI = 2.0 * math.pi


def _frozen(a, dtype=None) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


# ---------------------------------------------------------------------------
# cavity modes and process configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CavityMode:
    """A single cavity resonance given by its outcoupling and loss rates.

    The total linewidth (FWHM, rad/s) is always derived as the sum of the
    two rates, never stored on its own.
    """

    coupling_rate: float
    intrinsic_loss_rate: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.coupling_rate) and np.isfinite(self.intrinsic_loss_rate)):
            raise InvalidLinewidth("cavity rates must be finite")
        if self.coupling_rate < 0 or self.intrinsic_loss_rate < 0:
            raise InvalidLinewidth(
                f"rates must be non-negative, got coupling={self.coupling_rate!r}, "
                f"loss={self.intrinsic_loss_rate!r}")
        if self.coupling_rate + self.intrinsic_loss_rate <= 0:
            raise InvalidLinewidth("total linewidth must be positive")

    @classmethod
    def from_linewidth(cls, linewidth: float, kappa: float = 1.0) -> "CavityMode":
        """Build a mode from its total linewidth and coupling coefficient."""
        if not linewidth > 0:
            raise InvalidLinewidth(f"linewidth must be positive, got {linewidth!r}")
        if not 0.0 <= kappa <= 1.0:
            raise InvalidLinewidth(f"coupling coefficient must lie in [0, 1], got {kappa!r}")
        coupling = kappa * linewidth
        return cls(coupling, linewidth - coupling)

    @property
    def linewidth_total(self) -> float:
        return self.coupling_rate + self.intrinsic_loss_rate

    @property
    def kappa(self) -> float:
        return self.coupling_rate / self.linewidth_total


@dataclass(frozen=True)
class ProcessConfig:
    """Signal/idler (and optionally pump) modes plus the drive parameters.

    ``mismatch_delta`` is the mismatch between the cavity resonances.  With a
    pump mode present, the mismatch seen by the parametric process is
    ``mismatch_delta + pump_detuning`` (see :attr:`delta`); without one the
    pump detuning plays no role.

    ``pump_power`` is the external pump power.  For a triply resonant
    configuration it is the input power, and the drive entering the
    parametric process is the stored intracavity energy.
    """

    signal: CavityMode
    idler: CavityMode
    pump: Optional[CavityMode] = None
    mismatch_delta: float = 0.0
    pump_detuning: float = 0.0
    process_order: int = 1
    coupling_strength: float = 1.0
    pump_power: float = 0.0

    def __post_init__(self):
        validate(self)

    # -- derived quantities -------------------------------------------------
    @property
    def gamma_s(self) -> float:
        return self.signal.linewidth_total

    @property
    def gamma_i(self) -> float:
        return self.idler.linewidth_total

    @property
    def gamma_mean(self) -> float:
        return 0.5 * (self.gamma_s + self.gamma_i)

    @property
    def triply_resonant(self) -> bool:
        return self.pump is not None

    @property
    def delta(self) -> float:
        """Mismatch entering the parametric interaction."""
        if self.pump is None:
            return self.mismatch_delta
        return self.mismatch_delta + self.pump_detuning

    @property
    def threshold(self) -> float:
        """Oscillation threshold drive P0 (W or J)."""
        g = self.coupling_strength
        if g == 0:
            return math.inf
        if self.process_order == 1:
            return self.gamma_s * self.gamma_i / g**2
        return math.sqrt(self.gamma_s * self.gamma_i) / g

    @property
    def drive(self) -> float:
        """|alpha_p|^2 driving the nonlinear process (W or J)."""
        if self.pump is None:
            return self.pump_power
        from .pump import cw_intracavity_energy
        return cw_intracavity_energy(self.pump_power, self.pump, self.pump_detuning)

    @property
    def power_ratio(self) -> float:
        """Dimensionless (P/P0)^j."""
        return (self.drive / self.threshold) ** self.process_order

    def with_power_ratio(self, ratio: float) -> "ProcessConfig":
        """Copy with the pump power chosen so that (P/P0)^j equals ``ratio``."""
        if ratio < 0:
            raise ConfigurationError("power ratio must be non-negative")
        if self.coupling_strength == 0:
            raise ConfigurationError("without a nonlinearity no pump power sets a finite power ratio")
        drive = self.threshold * ratio ** (1.0 / self.process_order)
        if self.pump is None:
            power = drive
        else:
            from .pump import cw_intracavity_energy
            power = drive / cw_intracavity_energy(1.0, self.pump, self.pump_detuning)
        return replace(self, pump_power=power)

    def replace(self, **changes) -> "ProcessConfig":
        return replace(self, **changes)

    @classmethod
    def symmetric(cls, gamma: float, delta: float = 0.0, kappa: float = 1.0,
                  **kwargs) -> "ProcessConfig":
        """Equal signal and idler linewidths, the common experimental case."""
        mode = CavityMode.from_linewidth(gamma, kappa)
        return cls(signal=mode, idler=mode, mismatch_delta=delta, **kwargs)


def validate(config: ProcessConfig) -> ProcessConfig:
    """Return ``config`` if all invariants hold, raise otherwise."""
    if config.process_order not in (1, 2):
        raise BadProcessOrder(f"process order must be 1 (SPDC) or 2 (SFWM), got {config.process_order!r}")
    for name in ("signal", "idler"):
        mode = getattr(config, name)
        if not isinstance(mode, CavityMode):
            raise ConfigurationError(f"{name} must be a CavityMode")
    if config.pump is not None and not isinstance(config.pump, CavityMode):
        raise ConfigurationError("pump must be a CavityMode or None")
    if not config.coupling_strength >= 0:
        raise ConfigurationError("coupling strength g must be non-negative")
    if config.pump_power < 0:
        raise ConfigurationError("pump power must be non-negative")
    for name in ("mismatch_delta", "pump_detuning"):
        if not np.isfinite(getattr(config, name)):
            raise ConfigurationError(f"{name} must be finite")
    if config.power_ratio >= 1.0:
        raise AboveThreshold(
            f"(P/P0)^j = {config.power_ratio:.6g} is at or above the oscillation threshold")
    return config


def require_pump(config: ProcessConfig) -> CavityMode:
    if config.pump is None:
        raise MissingPumpMode("operation needs a triply resonant configuration")
    return config.pump


# ---------------------------------------------------------------------------
# sampled data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Axis:
    """Uniform sampling ``start + k*step`` for ``k < size``."""

    start: float
    step: float
    size: int
    label: str = ""
    unit: str = ""

    def __post_init__(self):
        if not self.step > 0:
            raise NonUniformGrid(f"axis step must be positive, got {self.step!r}")
        if int(self.size) != self.size or self.size < 1:
            raise ConfigurationError(f"axis size must be a positive integer, got {self.size!r}")

    @classmethod
    def from_values(cls, values: Sequence[float], label: str = "", unit: str = "",
                    rtol: float = 1e-9) -> "Axis":
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise NonUniformGrid("need at least two coordinates")
        d = np.diff(v)
        step = (v[-1] - v[0]) / (v.size - 1)
        if step <= 0 or np.max(np.abs(d - step)) > rtol * max(abs(step), 1e-300) + 1e-12 * np.max(np.abs(v)):
            raise NonUniformGrid("coordinates are not uniformly spaced")
        return cls(float(v[0]), float(step), int(v.size), label, unit)

    @classmethod
    def linspace(cls, start: float, stop: float, size: int, label: str = "", unit: str = "") -> "Axis":
        return cls(float(start), (stop - start) / (size - 1), int(size), label, unit)

    @property
    def values(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.size)

    @property
    def stop(self) -> float:
        return self.start + self.step * (self.size - 1)

    def index_of(self, t: float, tol: float = 1e-6) -> int:
        """Index of the node at ``t``; GridMismatch if ``t`` is not a node."""
        x = (t - self.start) / self.step
        k = int(round(x))
        if abs(x - k) > tol:
            raise GridMismatch(f"time {t!r} does not fall on a grid node")
        return k

    def compatible(self, other: "Axis", rtol: float = 1e-9) -> bool:
        return (self.size == other.size
                and abs(self.step - other.step) <= rtol * self.step
                and abs(self.start - other.start) <= rtol * max(abs(self.start), self.step))


@dataclass(frozen=True)
class Trace:
    axis: Axis
    values: np.ndarray
    label: str = "value"
    unit: str = ""

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size != self.axis.size:
            raise ConfigurationError(
                f"trace has {v.size} values but its axis declares {self.axis.size}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def x(self) -> np.ndarray:
        return self.axis.values


@dataclass(frozen=True)
class Grid2D:
    """Row-major 2-D samples; first axis is signal, second is idler."""

    axes: Tuple[Axis, Axis]
    values: np.ndarray
    label: str = "value"

    def __post_init__(self):
        v = np.asarray(self.values)
        a, b = self.axes
        if v.shape != (a.size, b.size):
            raise ConfigurationError(
                f"grid values have shape {v.shape}, axes declare {(a.size, b.size)}")
        object.__setattr__(self, "values", _frozen(v))


# ---------------------------------------------------------------------------
# pump envelopes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeSamples:
    """An envelope (raised to some power) on a grid with explicit support.

    Values outside ``[first, last]`` are zero.  The quadratures treat the
    envelope as piecewise linear between nodes inside the support and zero
    outside it, so support ends behave as sharp edges.
    """

    values: np.ndarray
    first: int
    last: int

    @property
    def empty(self) -> bool:
        return self.last < self.first


@dataclass(frozen=True)
class CW:
    amplitude: complex = 1.0

    def sample(self, axis: Axis, power: int = 1) -> EnvelopeSamples:
        """Constant drive switched on at the first grid node."""
        vals = np.full(axis.size, complex(self.amplitude) ** power, dtype=complex)
        return EnvelopeSamples(vals, 0, axis.size - 1)

    def peak_power(self) -> float:
        return abs(self.amplitude) ** 2


@dataclass(frozen=True)
class Rectangular:
    """Switched on at t = 0 and off at t = duration."""

    amplitude: complex = 1.0
    duration: float = 1.0

    def __post_init__(self):
        if not self.duration > 0:
            raise ConfigurationError("rectangular pulse duration must be positive")

    def sample(self, axis: Axis, power: int = 1) -> EnvelopeSamples:
        if axis.start > 1e-6 * axis.step:
            raise GridMismatch("grid starts after the rectangular pulse is switched on")
        first = axis.index_of(0.0)
        if self.duration >= axis.stop:
            last = axis.size - 1
        else:
            last = axis.index_of(self.duration)
        vals = np.zeros(axis.size, dtype=complex)
        vals[first:last + 1] = complex(self.amplitude) ** power
        return EnvelopeSamples(vals, first, last)

    def peak_power(self) -> float:
        return abs(self.amplitude) ** 2


@dataclass(frozen=True)
class Sampled:
    """Arbitrary slowly varying envelope, zero outside its samples."""

    start_time: float
    step: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if not self.step > 0:
            raise NonUniformGrid("sampled envelope step must be positive")
        if v.ndim != 1 or v.size < 2:
            raise ConfigurationError("sampled envelope needs at least 2 samples")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def axis(self) -> Axis:
        return Axis(self.start_time, self.step, self.values.size, "t", "s")

    @property
    def end_time(self) -> float:
        return self.start_time + self.step * (self.values.size - 1)

    def sample(self, axis: Axis, power: int = 1) -> EnvelopeSamples:
        tol = 1e-6
        first = max(0, int(math.ceil((self.start_time - axis.start) / axis.step - tol)))
        last = min(axis.size - 1, int(math.floor((self.end_time - axis.start) / axis.step + tol)))
        vals = np.zeros(axis.size, dtype=complex)
        if last >= first:
            t = axis.values[first:last + 1]
            own = self.axis.values
            re = np.interp(t, own, self.values.real)
            im = np.interp(t, own, self.values.imag)
            vals[first:last + 1] = (re + 1j * im) ** power
        return EnvelopeSamples(vals, first, last)

    def peak_power(self) -> float:
        return float(np.max(np.abs(self.values)) ** 2)

    @classmethod
    def from_function(cls, func, axis: Axis) -> "Sampled":
        return cls(axis.start, axis.step, np.asarray(func(axis.values), dtype=complex))


PumpEnvelope = Union[CW, Rectangular, Sampled]


def gaussian_pulse(axis: Axis, width: float, center: float = 0.0,
                   amplitude: complex = 1.0) -> Sampled:
    """Sampled Gaussian amplitude ``a*exp(-(t-c)^2/(2 width^2))``."""
    return Sampled.from_function(
        lambda t: amplitude * np.exp(-0.5 * ((t - center) / width) ** 2), axis)


def gaussian_pulse_spectrum(width: float, center: float = 0.0, amplitude: complex = 1.0,
                            power: int = 1):
    """Spectral amplitude of ``gaussian_pulse(...)**power``.

    Uses ``alpha(omega) = (1/2pi) * integral alpha(t) exp(i omega t) dt`` so that
    ``alpha(t) = integral alpha(omega) exp(-i omega t) d omega``.  The square of
    a Gaussian has the spectrum of the autoconvolution, i.e. a Gaussian whose
    spectral width is larger by sqrt(2).
    """
    w = width / math.sqrt(power)
    a = complex(amplitude) ** power

    def spectrum(omega):
        omega = np.asarray(omega, dtype=float)
        return a * w / math.sqrt(TWO_PI) * np.exp(-0.5 * (omega * w) ** 2 + 1j * omega * center)

    return spectrum
