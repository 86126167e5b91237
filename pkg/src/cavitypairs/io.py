"""Configuration files, CSV traces, manifests and grid dumps.

Configuration files are flat ``key = value`` text.  Numbers may carry a
unit suffix; keys ending in ``_over_2pi`` hold ordinary frequencies (Hz)
and are converted to angular frequency when read, with the suffix dropped.
Comma-separated values give lists.  ``#`` starts a comment.
"""
from __future__ import annotations

import csv
import math
import re
import struct
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import TWO_PI, Axis, Grid2D
from .errors import ConfigurationError

UNITS = {
    # frequency
    "hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12,
    # time
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9, "ps": 1e-12, "fs": 1e-15,
    # power
    "w": 1.0, "mw": 1e-3, "uw": 1e-6, "µw": 1e-6, "nw": 1e-9, "pw": 1e-12,
    # energy
    "j": 1.0, "mj": 1e-3, "uj": 1e-6, "nj": 1e-9, "pj": 1e-12, "fj": 1e-15,
    # temperature
    "k": 1.0, "mk": 1e-3, "uk": 1e-6,
    # angular frequency
    "rad/s": 1.0,
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s\d][^\s]*)?\s*$")
SUFFIX = "_over_2pi"


def parse_quantity(text: str) -> float:
    m = _NUMBER.match(text)
    if not m:
        raise ConfigurationError(f"not a number: {text!r}")
    value = float(m.group(1))
    unit = m.group(2)
    if unit:
        key = unit.lower()
        # "MHz" and "mHz" collide after lowercasing; frequency prefixes are upper case
        if unit == "mHz":
            raise ConfigurationError("millihertz is not supported; did you mean MHz?")
        if unit == "MW" or unit == "MJ":
            raise ConfigurationError(f"unit {unit!r} is ambiguous; use W or J with a lower-case prefix")
        if key not in UNITS:
            raise ConfigurationError(f"unknown unit {unit!r}")
        value *= UNITS[key]
    return value


@dataclass
class Config:
    """Parsed configuration: SI numbers (angular frequencies) plus raw text."""

    values: Dict[str, object] = field(default_factory=dict)
    raw: Dict[str, str] = field(default_factory=dict)

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def number(self, key: str, default: Optional[float] = None) -> float:
        v = self.values.get(key, default)
        if v is None:
            raise ConfigurationError(f"missing required key {key!r}")
        if isinstance(v, list):
            if len(v) != 1:
                raise ConfigurationError(f"key {key!r} must hold a single value")
            v = v[0]
        if isinstance(v, str):
            raise ConfigurationError(f"key {key!r} must be numeric, got {v!r}")
        return float(v)

    def numbers(self, key: str, default: Optional[Sequence[float]] = None) -> List[float]:
        v = self.values.get(key, default)
        if v is None:
            raise ConfigurationError(f"missing required key {key!r}")
        seq = v if isinstance(v, list) else [v]
        if any(isinstance(x, str) for x in seq):
            raise ConfigurationError(f"key {key!r} must be numeric")
        return [float(x) for x in seq]

    def text(self, key: str, default: Optional[str] = None) -> str:
        v = self.raw.get(key, default)
        if v is None:
            raise ConfigurationError(f"missing required key {key!r}")
        return v.strip()

    def integer(self, key: str, default: Optional[int] = None) -> int:
        v = self.number(key, default)
        if v != int(v):
            raise ConfigurationError(f"key {key!r} must be an integer")
        return int(v)


def _parse_value(text: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) > 1:
        # a trailing unit on the last element applies to all bare numbers
        m = _NUMBER.match(parts[-1])
        unit = m.group(2) if m and m.group(2) else ""
        out = []
        for p in parts:
            mm = _NUMBER.match(p)
            if mm is None:
                return text.strip()
            out.append(parse_quantity(p if mm.group(2) else f"{p} {unit}".strip()))
        return out
    try:
        return parse_quantity(text)
    except ConfigurationError:
        m = _NUMBER.match(text)
        # a number followed by something unit-like is a typo; anything else is text
        if m and m.group(2) and (m.group(2)[0].isalpha() or m.group(2)[0] == "µ"):
            raise
        return text.strip()


def parse_config(text: str) -> Config:
    cfg = Config()
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {n}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"line {n}: empty key")
        parsed = _parse_value(val)
        cfg.raw[key] = val
        if key.endswith(SUFFIX):
            if isinstance(parsed, str):
                raise ConfigurationError(f"line {n}: {key} must be a frequency")
            base = key[: -len(SUFFIX)]
            parsed = [TWO_PI * x for x in parsed] if isinstance(parsed, list) else TWO_PI * parsed
            cfg.values[base] = parsed
            cfg.raw.setdefault(base, val)
        else:
            cfg.values[key] = parsed
    return cfg


def read_config(path) -> Config:
    with open(path) as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# CSV traces
# ---------------------------------------------------------------------------

def write_columns(path, columns: Sequence[Tuple[str, str, np.ndarray]]) -> None:
    """CSV with a one-line header of ``name (unit)`` entries."""
    names = [f"{n} ({u})" if u else n for n, u, _ in columns]
    data = [np.asarray(c, dtype=float) for _, _, c in columns]
    size = {d.size for d in data}
    if len(size) != 1:
        raise ConfigurationError("columns have different lengths")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*data):
            w.writerow([repr(float(x)) for x in row])


def read_columns(path) -> Tuple[List[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    header = rows[0]
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:]])
    except ValueError as exc:
        raise ConfigurationError(f"{path}: non-numeric data") from exc
    return header, data


def write_grid_csv(grid: Grid2D, path, units: Tuple[str, str] = ("s", "s")) -> None:
    a, b = grid.axes
    A, B = np.meshgrid(a.values, b.values, indexing="ij")
    v = np.asarray(grid.values, dtype=complex)
    write_columns(path, [("axis1", units[0], A.ravel()), ("axis2", units[1], B.ravel()),
                         ("re", "", v.real.ravel()), ("im", "", v.imag.ravel())])


# Binary grid layout (little endian):
#   4s   magic "CPG2"
#   u32  format version (1)
#   u64  rows, u64 columns
#   f64  axis1 start, f64 axis2 start
#   f64  axis1 step,  f64 axis2 step
#   rows*columns pairs of f64 (re, im), row-major
GRID_MAGIC = b"CPG2"
_HEADER = struct.Struct("<4sIQQdddd")


def save_grid_binary(grid: Grid2D, path) -> None:
    a, b = grid.axes
    v = np.ascontiguousarray(np.asarray(grid.values, dtype="<c16"))
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(GRID_MAGIC, 1, a.size, b.size, a.start, b.start, a.step, b.step))
        fh.write(v.tobytes())


def load_grid_binary(path) -> Grid2D:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ConfigurationError("truncated grid file")
        magic, version, n, m, a0, b0, da, db = _HEADER.unpack(head)
        if magic != GRID_MAGIC or version != 1:
            raise ConfigurationError("not a grid dump")
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != n * m:
        raise ConfigurationError("grid payload size does not match header")
    return Grid2D((Axis(a0, da, n), Axis(b0, db, m)), data.reshape(n, m).astype(complex))


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------

RUN_KEY_PREFIXES = ("result.", "engine_version", "backend", "rng")


def write_manifest(path, command: str, config: Config, extra: Dict[str, object]) -> None:
    """Config-compatible text: re-reading it as a config reproduces the run."""
    lines = [f"command = {command}"]
    lines += [f"{k} = {v}" for k, v in config.raw.items()
              if not (k + SUFFIX in config.raw) and k != "command" and k not in extra
              and not k.startswith(RUN_KEY_PREFIXES)]
    for k, v in extra.items():
        lines.append(f"{k} = {v}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
