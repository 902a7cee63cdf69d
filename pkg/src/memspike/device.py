"""Phenomenological memristor with a volatile short-term memory.

The device keeps an internal equilibrated voltage ``v_mem``. A voltage
change produces a current spike proportional to ``v - v_mem``; afterwards
``v_mem`` relaxes geometrically toward the applied voltage::

    i      = g_eq * v + g_spike * a * (v - v_mem)
    v_mem' = v + (v_mem - v) * exp(-dt / tau)

with ``a = asymmetry`` for negative-going spikes and 1 otherwise. The
current is measured against the pre-step memory, so the spike is the first
sample after the change.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

TRACE_HEADER = ("step", "time_s", "voltage_V", "current_A")


@dataclass(frozen=True)
class DeviceParams:
    """Model constants. Units are SI (siemens, seconds, volts, amperes)."""

    g_eq: float = 1e-7
    g_spike: float = 1e-6
    tau: float = 1.5
    dt: float = 0.16
    asymmetry: float = 1.0
    noise_sigma: float = 0.0
    zero_steps: int = 40
    epsilon_mem: float = 1e-12

    def __post_init__(self):
        for name in ("g_eq", "g_spike", "tau", "dt", "asymmetry", "epsilon_mem"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if not self.g_spike > self.g_eq:
            raise ValueError("g_spike must exceed g_eq")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ValueError("noise_sigma must be finite and >= 0")
        if isinstance(self.zero_steps, bool) or not isinstance(self.zero_steps, int) or self.zero_steps < 0:
            raise ValueError("zero_steps must be a non-negative integer")
        if not 0.0 < self.retention < 1.0:
            raise ValueError("exp(-dt/tau) must lie strictly between 0 and 1")

    @property
    def retention(self) -> float:
        """Per-step memory retention factor ``exp(-dt/tau)``."""
        return math.exp(-self.dt / self.tau)

    @classmethod
    def from_retention(cls, retention: float, dt: float = 1.0, **kwargs) -> "DeviceParams":
        """Build params whose per-step retention equals ``retention``."""
        if not 0.0 < retention < 1.0:
            raise ValueError("retention must lie strictly between 0 and 1")
        return cls(dt=dt, tau=dt / -math.log(retention), **kwargs)

    def deterministic(self) -> "DeviceParams":
        return replace(self, noise_sigma=0.0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "DeviceParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown device parameter(s): {', '.join(sorted(unknown))}")
        return cls(**data)


def load_params(path: str | Path) -> DeviceParams:
    """Read a JSON object of DeviceParams fields; missing keys keep their defaults."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object of device parameters")
    return DeviceParams.from_dict(data)


@dataclass(frozen=True)
class DeviceState:
    v_mem: float = 0.0
    step_index: int = 0

    def validate(self) -> None:
        if not math.isfinite(self.v_mem):
            raise ValueError(f"corrupted device state: v_mem={self.v_mem!r}")
        if isinstance(self.step_index, bool) or not isinstance(self.step_index, int) or self.step_index < 0:
            raise ValueError(f"corrupted device state: step_index={self.step_index!r}")


@dataclass(frozen=True)
class CurrentSample:
    step_index: int
    time_s: float
    v_applied: float
    i_measured: float


def step(
    state: DeviceState,
    params: DeviceParams,
    v: float,
    rng: np.random.Generator | None = None,
) -> tuple[DeviceState, CurrentSample]:
    """Apply ``v`` for one time-step; return the new state and the measured sample."""
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"applied voltage must be finite, got {v!r}")
    state.validate()

    drive = v - state.v_mem
    gain = params.asymmetry if drive < 0 else 1.0
    current = params.g_eq * v + params.g_spike * gain * drive
    if params.noise_sigma > 0:
        if rng is None:
            raise ValueError("noise_sigma > 0 requires a random generator")
        current += params.noise_sigma * rng.standard_normal()

    sample = CurrentSample(state.step_index, state.step_index * params.dt, v, current)
    v_mem = v + (state.v_mem - v) * params.retention
    return DeviceState(v_mem, state.step_index + 1), sample


def hold(
    state: DeviceState,
    params: DeviceParams,
    v: float,
    n_steps: int,
    rng: np.random.Generator | None = None,
) -> tuple[DeviceState, list[CurrentSample]]:
    trace = []
    for _ in range(n_steps):
        state, sample = step(state, params, v, rng)
        trace.append(sample)
    return state, trace


def zero(
    state: DeviceState,
    params: DeviceParams,
    rng: np.random.Generator | None = None,
) -> DeviceState:
    """Erase the short-term memory by holding 0 V.

    Holds for ``zero_steps`` steps, and longer if the residual still exceeds
    ``epsilon_mem``. A residual inside the tolerance is then discarded so
    that later runs reproduce a fresh device exactly.
    """
    state, _ = hold(state, params, 0.0, params.zero_steps, rng)
    while abs(state.v_mem) > params.epsilon_mem:
        state, _ = step(state, params, 0.0, rng)
    return DeviceState(0.0, state.step_index)


def run_schedule(
    params: DeviceParams,
    schedule: Sequence[float],
    rng: np.random.Generator | None = None,
    state: DeviceState | None = None,
) -> list[CurrentSample]:
    """Drive a device (fresh unless ``state`` is given) through ``schedule``."""
    if len(schedule) == 0:
        raise ValueError("schedule must contain at least one voltage")
    state = DeviceState() if state is None else state
    trace = []
    for v in schedule:
        state, sample = step(state, params, v, rng)
        trace.append(sample)
    return trace


def currents(trace: Iterable[CurrentSample]) -> np.ndarray:
    return np.array([s.i_measured for s in trace], dtype=float)


class Device:
    """A stateful device instance; not safe to share between threads."""

    def __init__(self, params: DeviceParams | None = None, seed: int = 0):
        self.params = params or DeviceParams()
        self.rng = np.random.default_rng(seed)
        self.state = DeviceState()

    @property
    def v_mem(self) -> float:
        return self.state.v_mem

    def is_erased(self) -> bool:
        return abs(self.state.v_mem) <= self.params.epsilon_mem

    def apply(self, v: float) -> CurrentSample:
        self.state, sample = step(self.state, self.params, v, self.rng)
        return sample

    def run(self, schedule: Sequence[float]) -> list[CurrentSample]:
        if len(schedule) == 0:
            raise ValueError("schedule must contain at least one voltage")
        return [self.apply(v) for v in schedule]

    def zero(self) -> None:
        self.state = zero(self.state, self.params, self.rng)


def trace_to_csv(trace: Iterable[CurrentSample], out: io.TextIOBase | None = None) -> str:
    """Render a trace as CSV with full double precision (``repr`` floats)."""
    buf = out if out is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for s in trace:
        writer.writerow([s.step_index, repr(s.time_s), repr(s.v_applied), repr(s.i_measured)])
    return buf.getvalue() if out is None else ""


def write_trace_csv(trace: Iterable[CurrentSample], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        trace_to_csv(trace, fh)


def read_trace_csv(path: str | Path) -> list[CurrentSample]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            CurrentSample(int(row["step"]), float(row["time_s"]), float(row["voltage_V"]), float(row["current_A"]))
            for row in reader
        ]
