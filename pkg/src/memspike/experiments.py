"""Non-gate experiments: habituation, spike summation, and spike-order sweep.

Each experiment owns its device. A preset ``dt`` overrides the device
parameter file; ``dt=None`` keeps the device's own step.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

from .device import Device, DeviceParams, write_trace_csv

EXPERIMENT_NAMES = ("habituation", "summation", "order-sweep")


def _with_dt(params: DeviceParams, dt: float | None) -> DeviceParams:
    return params if dt is None else replace(params, dt=dt)


def _strictly_decreasing(xs: Sequence[float]) -> bool:
    return all(a > b for a, b in zip(xs, xs[1:]))


def _strictly_increasing(xs: Sequence[float]) -> bool:
    return all(a < b for a, b in zip(xs, xs[1:]))


# -- habituation ------------------------------------------------------------


@dataclass(frozen=True)
class HabituationProtocol:
    """``train_gap_steps`` is the onset-to-onset spacing of the train pulses."""

    baseline_pulses: int = 40
    pulse_voltage: float = 0.1
    pulse_width_steps: int = 1
    train_pulses: int = 6
    train_gap_steps: int = 2
    dt: float | None = 0.084

    def __post_init__(self):
        for name in ("baseline_pulses", "pulse_width_steps", "train_pulses", "train_gap_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.pulse_voltage == 0:
            raise ValueError("pulse_voltage must be non-zero")


@dataclass
class HabituationReport:
    protocol: HabituationProtocol
    baseline_hold: list[float]
    rested_responses: list[float]
    rested_bounce: list[float]
    train_responses: list[float]
    train_bounce: list[float | None]
    assertions: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.assertions.values())

    def bounce_direction(self) -> str:
        """Whether train bounce-backs grow away from, or toward, the rested one."""
        rested = abs(self.rested_bounce[0])
        dev = [abs(abs(b) - rested) for b in self.train_bounce if b is not None]
        if len(dev) < 2 or dev[-1] == dev[0]:
            return "flat"
        return "away" if dev[-1] > dev[0] else "toward"

    def to_dict(self) -> dict:
        return {
            "protocol": asdict(self.protocol),
            "rested_responses_A": self.rested_responses,
            "rested_bounce_A": self.rested_bounce,
            "train_responses_A": self.train_responses,
            "train_bounce_A": self.train_bounce,
            "bounce_direction": self.bounce_direction(),
            "assertions": self.assertions,
        }


def run_habituation(protocol: HabituationProtocol, params: DeviceParams, seed: int = 0) -> HabituationReport:
    params = _with_dt(params, protocol.dt)
    v, width, gap = protocol.pulse_voltage, protocol.pulse_width_steps, protocol.train_gap_steps
    device = Device(params, seed)

    # baseline: one continuous hold, then memory-free single pulses
    hold = [s.i_measured for s in device.run([v] * protocol.baseline_pulses)]
    device.zero()
    rested, rested_bounce = [], []
    for _ in range(protocol.train_pulses):
        trace = device.run([v] * width + [0.0])
        rested.append(trace[0].i_measured)
        rested_bounce.append(trace[width].i_measured)
        device.zero()

    length = (protocol.train_pulses - 1) * gap + width + 1
    schedule = [0.0] * length
    onsets = [k * gap for k in range(protocol.train_pulses)]
    for t in onsets:
        for j in range(width):
            schedule[t + j] = v
    trace = device.run(schedule)
    device.zero()
    train = [trace[t].i_measured for t in onsets]
    bounce = [trace[t + width].i_measured if schedule[t + width] == 0.0 else None for t in onsets]

    sign = 1.0 if v > 0 else -1.0
    mag = [sign * r for r in train]
    drops = [a - b for a, b in zip(mag, mag[1:])]
    assertions = {
        "train strictly decreasing": _strictly_decreasing(mag),
        "train increments strictly decreasing": _strictly_decreasing(drops),
        "rested responses equal first train response": all(r == train[0] for r in rested),
        "bounce-back opposite in sign": all(b is None or sign * b < 0 for b in bounce),
    }
    return HabituationReport(protocol, hold, rested, rested_bounce, train, bounce, assertions)


# -- spike summation ---------------------------------------------------------


@dataclass(frozen=True)
class SummationDemo:
    voltage: float = 1.0
    long_steps: int = 150
    short_steps: int = 1
    rest_steps: int = 250
    repeats: int = 3
    dt: float | None = 0.02

    def __post_init__(self):
        for name in ("long_steps", "short_steps", "rest_steps", "repeats"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.short_steps >= self.long_steps:
            raise ValueError("short_steps must be shorter than long_steps")

    def schedule(self) -> tuple[list[float], list[int], list[int]]:
        """Voltages plus the step indices where long and short pulses return to 0 V."""
        sched, long_ret, short_ret = [], [], []
        for steps, returns in ((self.long_steps, long_ret), (self.short_steps, short_ret)):
            for _ in range(self.repeats):
                sched += [self.voltage] * steps
                returns.append(len(sched))
                sched += [0.0] * self.rest_steps
        return sched, long_ret, short_ret


@dataclass
class SummationReport:
    demo: SummationDemo
    trace: list
    long_negative: list[float]
    short_negative: list[float]
    assertions: dict[str, bool | None]

    @property
    def passed(self) -> bool:
        return all(v is not False for v in self.assertions.values())

    def to_dict(self) -> dict:
        return {
            "demo": asdict(self.demo),
            "long_return_spikes_A": self.long_negative,
            "short_return_spikes_A": self.short_negative,
            "assertions": self.assertions,
        }


def run_summation_demo(params: DeviceParams, demo: SummationDemo | None = None, seed: int = 0) -> SummationReport:
    demo = demo or SummationDemo()
    params = _with_dt(params, demo.dt)
    sched, long_ret, short_ret = demo.schedule()
    trace = Device(params, seed).run(sched)
    long_neg = [trace[t].i_measured for t in long_ret]
    short_neg = [trace[t].i_measured for t in short_ret]
    if demo.voltage == 0:
        smaller = None
    else:
        smaller = max(abs(x) for x in short_neg) < min(abs(x) for x in long_neg)
    assertions = {
        "short-pulse return spike smaller": smaller,
        "return spikes opposite in sign": None if demo.voltage == 0 else all(x * demo.voltage < 0 for x in long_neg + short_neg),
    }
    return SummationReport(demo, trace, long_neg, short_neg, assertions)


# -- spike order sweep -------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    v_b: float = 0.12
    v_a_values: tuple[float, ...] = tuple(k / 100 for k in range(1, 13))
    gap: int = 1
    dt: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "v_a_values", tuple(self.v_a_values))
        va = self.v_a_values
        if not va:
            raise ValueError("v_a_values is empty")
        if any(a <= 0 or a > self.v_b for a in va):
            raise ValueError("need 0 < v_a <= v_b for every sweep point")
        if not _strictly_increasing(va):
            raise ValueError("v_a_values must be strictly ascending")
        if self.gap < 1:
            raise ValueError("gap must be >= 1")


SWEEP_COLUMNS = ("v_a", "S1", "T1", "T2", "S2", "sum_AB", "sum_BA")


@dataclass(frozen=True)
class SweepRow:
    v_a: float
    S1: float  # i(0 -> A)
    T1: float  # i(A -> B)
    T2: float  # i(0 -> B)
    S2: float  # i(B -> A)

    @property
    def sum_AB(self) -> float:
        return self.S1 + self.T1

    @property
    def sum_BA(self) -> float:
        return self.T2 + self.S2

    def as_tuple(self) -> tuple[float, ...]:
        return (self.v_a, self.S1, self.T1, self.T2, self.S2, self.sum_AB, self.sum_BA)


@dataclass
class SweepReport:
    spec: SweepSpec
    rows: list[SweepRow]
    assertions: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.assertions.values())

    def to_dict(self) -> dict:
        return {
            "spec": asdict(self.spec),
            "rows": [dict(zip(SWEEP_COLUMNS, r.as_tuple())) for r in self.rows],
            "assertions": self.assertions,
        }


def _pair(device: Device, first: float, second: float, gap: int) -> tuple[float, float]:
    trace = device.run([first] * gap + [second])
    device.zero()
    return trace[0].i_measured, trace[-1].i_measured


def run_order_sweep(spec: SweepSpec, params: DeviceParams, seed: int = 0, rel_tol: float = 1e-12) -> SweepReport:
    params = _with_dt(params, spec.dt)
    device = Device(params, seed)
    rows = []
    for va in spec.v_a_values:
        s1, t1 = _pair(device, va, spec.v_b, spec.gap)
        t2, s2 = _pair(device, spec.v_b, va, spec.gap)
        rows.append(SweepRow(va, s1, t1, t2, s2))

    below = [r for r in rows if r.v_a < spec.v_b]
    equal = [r for r in rows if r.v_a == spec.v_b]
    assertions = {
        "S1 strictly increasing": _strictly_increasing([r.S1 for r in rows]),
        "T1 strictly decreasing": _strictly_decreasing([r.T1 for r in rows]),
        "sum_AB > sum_BA below v_b": all(r.sum_AB > r.sum_BA for r in below),
        "sum_AB == sum_BA at v_b": all(
            abs(r.sum_AB - r.sum_BA) <= rel_tol * max(abs(r.sum_AB), abs(r.sum_BA)) for r in equal
        ),
    }
    return SweepReport(spec, rows, assertions)


def write_sweep_csv(report: SweepReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for r in report.rows:
            writer.writerow([repr(x) for x in r.as_tuple()])


# -- presets and file output -------------------------------------------------


def load_experiment_preset(name: str) -> dict:
    if name not in EXPERIMENT_NAMES:
        raise ValueError(f"unknown experiment {name!r}; valid: {', '.join(EXPERIMENT_NAMES)}")
    fname = f"experiment_{name}.json"
    return json.loads(resources.files("memspike.presets").joinpath(fname).read_text())


def run_experiment(name: str, params: DeviceParams, out_dir: str | Path, seed: int = 0) -> dict:
    """Run a bundled experiment preset, write its CSV and JSON summary, and
    return the summary."""
    preset = load_experiment_preset(name)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = name.replace("-", "_")

    if name == "habituation":
        reports = [run_habituation(HabituationProtocol(**p), params, seed) for p in preset["protocols"]]
        with open(out / f"{stem}.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("pulse_voltage_V", "pulse", "rested_A", "train_A", "train_bounce_A"))
            for rep in reports:
                for k, (r, t, b) in enumerate(zip(rep.rested_responses, rep.train_responses, rep.train_bounce), 1):
                    writer.writerow([repr(rep.protocol.pulse_voltage), k, repr(r), repr(t), "" if b is None else repr(b)])
        assertions = {}
        for rep in reports:
            for key, ok in rep.assertions.items():
                assertions[f"{key} ({rep.protocol.pulse_voltage:+g} V)"] = ok
        details = [rep.to_dict() for rep in reports]
        passed = all(rep.passed for rep in reports)
    elif name == "summation":
        rep = run_summation_demo(params, SummationDemo(**preset["demo"]), seed)
        write_trace_csv(rep.trace, out / f"{stem}.csv")
        assertions, details, passed = rep.assertions, rep.to_dict(), rep.passed
    else:
        spec = preset["sweep"]
        rep = run_order_sweep(SweepSpec(**spec), params, seed)
        write_sweep_csv(rep, out / f"{stem}.csv")
        assertions, details, passed = rep.assertions, rep.to_dict(), rep.passed

    summary = {"experiment": name, "passed": passed, "assertions": assertions, "details": details}
    (out / f"{stem}_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
