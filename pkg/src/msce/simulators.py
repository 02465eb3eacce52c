"""Time-series valued test simulators and target-series handling.

All analytic simulators map a native-scale input vector ``x`` to a series of
length ``L`` on an equidistant time grid.  Solvers work on the unit cube and
go through :class:`Simulator`, which unscales inputs, optionally adds noise
and keeps an audit log of every call.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "TimeGrid",
    "TimeSeries",
    "SimulatorSpec",
    "Simulator",
    "DomainError",
    "evaluate",
    "make_target",
    "load_external_target",
    "save_target",
    "get_spec",
    "SIMULATORS",
]


class DomainError(ValueError):
    """Input lies outside the simulator's box or a file is malformed."""


@dataclass(frozen=True)
class TimeGrid:
    """``L`` equidistant time points on ``[start, stop]``."""

    length: int
    start: float = 0.0
    stop: float = 1.0

    def __post_init__(self):
        if self.length < 2:
            raise ValueError("a time grid needs at least 2 points")
        if not self.stop > self.start:
            raise ValueError("time grid must be strictly increasing")

    @property
    def t_values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.length)

    @classmethod
    def from_values(cls, t: Sequence[float]) -> "TimeGrid":
        t = np.asarray(t, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise DomainError("time column must hold at least 2 values")
        if not np.all(np.isfinite(t)):
            raise DomainError("time column contains non-finite values")
        step = np.diff(t)
        if np.any(step <= 0):
            raise DomainError("time grid is not strictly increasing")
        grid = cls(int(t.size), float(t[0]), float(t[-1]))
        span = t[-1] - t[0]
        if np.max(np.abs(t - grid.t_values)) > 1e-12 * max(span, abs(t[-1]), 1.0) * 10:
            raise DomainError("time grid is not equidistant")
        return grid


@dataclass(frozen=True)
class TimeSeries:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.length,):
            raise ValueError(
                f"series has shape {values.shape}, grid expects ({self.grid.length},)"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("series contains non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.grid.length

    @property
    def t(self) -> np.ndarray:
        return self.grid.t_values


# --- analytic formulas -------------------------------------------------------
# Each takes a native-scale input vector and the time values; returns the series.


def _easom(x, t):
    x1, x2 = x
    return math.cos(x1) * math.cos(x2) * np.exp(-((x1 - np.pi * t) ** 2) - (x2 - np.pi) ** 2)


def _levy(x, t):
    w1, w2 = 1.0 + (np.asarray(x, dtype=float) - 1.0) / 4.0
    time_part = (t / 5.0 - 1.0) ** 2 * (1.0 + 10.0 * np.sin(0.5 * np.pi * t + 1.0) ** 2)
    w1_part = (w1 - 1.0) ** 2 * (1.0 + 10.0 * math.sin(math.pi * w1 + 1.0) ** 2)
    w2_part = (w2 - 1.0) ** 2 * (1.0 + math.sin(2.0 * math.pi * w2) ** 2)
    return np.sin(np.pi * t) ** 2 + time_part * w1_part + w2_part


def _harari(x, t):
    x1, x2, x3 = x
    return np.exp(3.0 * x1 * t + t) * np.cos(6.0 * x2 * t + 2.0 * t - 8.0 * x3 - 6.0)


def _bliznyuk(x, t):
    m, diff, loc, tau, pos = x
    out = m / np.sqrt(diff * t) * np.exp(-(pos**2) / (4.0 * diff * t))
    late = t > tau
    dt = t[late] - tau
    out[late] += m / np.sqrt(diff * dt) * np.exp(-((pos - loc) ** 2) / (4.0 * diff * dt))
    return out


@dataclass(frozen=True)
class _Family:
    formula: Callable
    bounds: tuple
    grid: TimeGrid


SIMULATORS = {
    "easom": _Family(_easom, ((0.0, 1.0), (0.0, 1.0)), TimeGrid(200, 0.0, 1.0)),
    # inputs enter the formula unscaled from [0, 1]; the classical box is (-10, 10)^2
    "levy": _Family(_levy, ((0.0, 1.0), (0.0, 1.0)), TimeGrid(200, 0.0, 1.0)),
    "harari": _Family(_harari, ((0.0, 1.0),) * 3, TimeGrid(200, 0.0, 1.0)),
    "bliznyuk": _Family(
        _bliznyuk,
        ((7.0, 13.0), (0.02, 0.12), (0.01, 3.0), (30.01, 30.304), (0.0, 3.0)),
        TimeGrid(200, 35.3, 95.0),
    ),
}


@dataclass(frozen=True)
class SimulatorSpec:
    """Which simulator to run, on what box and grid, with how much noise."""

    name: str
    input_box: tuple
    grid: TimeGrid
    noise_sd: float = 0.0

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.input_box)
        object.__setattr__(self, "input_box", box)
        if self.name != "external":
            if self.name not in SIMULATORS:
                raise ValueError(f"unknown simulator {self.name!r}")
            arity = len(SIMULATORS[self.name].bounds)
            if len(box) != arity:
                raise ValueError(f"{self.name} takes {arity} inputs, box has {len(box)}")
        for lo, hi in box:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"bad bounds ({lo}, {hi})")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")

    @property
    def input_dim(self) -> int:
        return len(self.input_box)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.input_box])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.input_box])

    def to_unit(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.lower) / (self.upper - self.lower)

    def from_unit(self, u) -> np.ndarray:
        return self.lower + np.asarray(u, dtype=float) * (self.upper - self.lower)


def get_spec(name: str, noise_sd: float = 0.0, grid: TimeGrid | None = None) -> SimulatorSpec:
    """Default spec for one of the named test simulators."""
    family = SIMULATORS[name]
    return SimulatorSpec(name, family.bounds, grid or family.grid, noise_sd)


def evaluate(spec: SimulatorSpec, x, rng: np.random.Generator | None = None) -> TimeSeries:
    """Run the named simulator at native-scale input ``x``."""
    if spec.name == "external":
        raise DomainError("an external simulator cannot be evaluated in-process")
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (spec.input_dim,):
        raise DomainError(f"expected {spec.input_dim} inputs, got {x.shape[0]}")
    if np.any(x < spec.lower) or np.any(x > spec.upper) or not np.all(np.isfinite(x)):
        raise DomainError(f"input {x.tolist()} outside box {spec.input_box}")
    values = np.asarray(SIMULATORS[spec.name].formula(x, spec.grid.t_values), dtype=float)
    if spec.noise_sd > 0:
        rng = rng if rng is not None else np.random.default_rng()
        values = values + rng.normal(0.0, spec.noise_sd, size=values.shape)
    return TimeSeries(spec.grid, values)


def make_target(spec: SimulatorSpec, x0, seed: int | None = None) -> tuple[TimeSeries, dict]:
    """Target series at ``x0`` plus the metadata needed to score a solution later."""
    rng = np.random.default_rng(seed)
    series = evaluate(spec, x0, rng)
    meta = {"x0": [float(v) for v in np.asarray(x0, dtype=float)], "seed": seed,
            "noise_sd": spec.noise_sd}
    return series, meta


def load_external_target(path) -> TimeSeries:
    """Read a ``t,value`` CSV (header required) into a series."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip().lower() for h in header] != ["t", "value"]:
                raise DomainError(f"{path}: expected header 't,value', got {header}")
            t, v = [], []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 2:
                    raise DomainError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
                try:
                    t.append(float(row[0]))
                    v.append(float(row[1]))
                except ValueError as exc:
                    raise DomainError(f"{path}:{lineno}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise DomainError(f"{path}: not UTF-8 ({exc})") from None
    values = np.array(v)
    if np.any(~np.isfinite(values)):
        raise DomainError(f"{path}: NaN or infinite values in series")
    return TimeSeries(TimeGrid.from_values(t), values)


def save_target(series: TimeSeries, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "value"])
        for ti, vi in zip(series.t, series.values):
            writer.writerow([repr(float(ti)), repr(float(vi))])


@dataclass
class Simulator:
    """Unit-cube view of a simulator that counts and logs every evaluation.

    ``rng`` drives the additive noise when ``spec.noise_sd > 0``.
    """

    spec: SimulatorSpec
    rng: np.random.Generator | None = None
    calls: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.spec.input_dim

    @property
    def n_calls(self) -> int:
        return len(self.calls)

    def __call__(self, u) -> np.ndarray:
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        series = evaluate(self.spec, self.spec.from_unit(u), self.rng)
        self.calls.append(u.copy())
        return series.values
