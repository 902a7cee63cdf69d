"""Sequential spiking logic on a single memristor.

Input bits are sent one per clock step. The device's short-term memory
holds earlier bits, so later spikes depend on the whole sequence. Each
gate reads one or more *channels*: a statistic over a window of the
current trace, decoded against calibrated threshold bands.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .device import CurrentSample, Device, DeviceParams, run_schedule
from .encoding import (
    EncodingScheme,
    Label,
    Statistic,
    ThresholdBands,
    bands_from_clusters,
    cluster_margin,
    clusters_from_pairs,
    decode,
)
from .errors import MemspikeError, OrderAmbiguous, Unclassifiable

Bits = tuple[int, ...]

PRESET_NAMES = ("not", "and", "or", "xor", "full-adder")

# Rows are (p, q) = (0,0), (0,1), (1,0), (1,1).
TWO_BIT_FUNCTIONS: dict[str, tuple[int, int, int, int]] = {
    "NOR": (1, 0, 0, 0),
    "AND": (0, 0, 0, 1),
    "NOT_P": (1, 1, 0, 0),
    "NOT_Q": (1, 0, 1, 0),
    "NXOR": (1, 0, 0, 1),
    "XOR": (0, 1, 1, 0),
    "NAND": (1, 1, 1, 0),
    "IMP": (1, 1, 0, 1),
    "OR": (0, 1, 1, 1),
}

# (a, b, c) -> (sum bit, carry, arithmetic sum)
FULL_ADDER_TABLE: dict[Bits, tuple[int, int, int]] = {
    (0, 0, 0): (0, 0, 0),
    (1, 0, 0): (1, 0, 1),
    (0, 1, 0): (1, 0, 1),
    (0, 0, 1): (1, 0, 1),
    (1, 1, 0): (0, 1, 2),
    (1, 0, 1): (0, 1, 2),
    (0, 1, 1): (0, 1, 2),
    (1, 1, 1): (1, 1, 3),
}

ORDER_FRESH, ORDER_CARRY, ORDER_ZERO = "fresh_one", "carry", "zero"
CARRY_SPAN = 3


def two_bit_truth(function: str) -> dict[Bits, int]:
    column = TWO_BIT_FUNCTIONS[function]
    return dict(zip(itertools.product((0, 1), repeat=2), column))


def order_classes(bits: Bits, input_steps: Sequence[int], span: int = CARRY_SPAN) -> tuple[str, ...]:
    """Expected class of the sample at each input step of the full adder.

    A 1-input is "carry" (an attenuated spike) when another 1 was sent at
    most ``span`` steps earlier, "fresh_one" otherwise; 0-inputs are "zero".
    """
    ones = [t for t, b in zip(input_steps, bits) if b]
    out = []
    for t, b in zip(input_steps, bits):
        if not b:
            out.append(ORDER_ZERO)
        elif any(0 < t - u <= span for u in ones):
            out.append(ORDER_CARRY)
        else:
            out.append(ORDER_FRESH)
    return tuple(out)


@dataclass(frozen=True)
class Channel:
    """A measurement read from a gate trace.

    ``window`` holds inclusive step offsets relative to the last input step;
    the start may be the string ``"first"`` for the first input step. A
    ``per_input`` channel instead samples every input step and carries one
    expected label per input.
    """

    name: str
    statistic: Statistic
    truth: Mapping[Bits, Label | tuple[Label, ...]]
    window: tuple[int | str, int] = (0, 0)
    per_input: bool = False

    def __post_init__(self):
        object.__setattr__(self, "statistic", Statistic(self.statistic))
        object.__setattr__(self, "window", tuple(self.window))
        object.__setattr__(
            self,
            "truth",
            {tuple(k): (tuple(v) if isinstance(v, list) else v) for k, v in self.truth.items()},
        )

    def to_dict(self) -> dict:
        doc = {
            "name": self.name,
            "statistic": self.statistic.value,
            "truth": {",".join(map(str, k)): (list(v) if isinstance(v, tuple) else v) for k, v in self.truth.items()},
        }
        if self.per_input:
            doc["per_input"] = True
        else:
            doc["window"] = list(self.window)
        return doc

    @classmethod
    def from_dict(cls, data: Mapping) -> "Channel":
        truth = {tuple(int(x) for x in k.split(",")): v for k, v in data["truth"].items()}
        return cls(
            name=data["name"],
            statistic=Statistic(data["statistic"]),
            truth=truth,
            window=tuple(data.get("window", (0, 0))),
            per_input=bool(data.get("per_input", False)),
        )


@dataclass(frozen=True)
class GateSpec:
    name: str
    encoding: EncodingScheme
    arity: int
    channels: tuple[Channel, ...]
    inter_bit_gap: int = 1
    read_pulses: tuple[tuple[int, float], ...] = ()
    response_window: int = 2
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "read_pulses", tuple((int(o), float(v)) for o, v in self.read_pulses))
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if self.inter_bit_gap < 1:
            raise ValueError("inter_bit_gap must be >= 1")
        if self.response_window < 1:
            raise ValueError("response_window must be >= 1")
        if not self.channels:
            raise ValueError("a gate needs at least one channel")
        for offset, _ in self.read_pulses:
            if not 1 <= offset <= self.response_window:
                raise ValueError(f"read pulse offset {offset} lies outside the response window")
        rows = set(itertools.product((0, 1), repeat=self.arity))
        for ch in self.channels:
            if set(ch.truth) != rows:
                raise ValueError(f"channel {ch.name!r} truth table must cover all {len(rows)} input rows")
            if ch.per_input:
                if any(len(v) != self.arity for v in ch.truth.values()):
                    raise ValueError(f"per-input channel {ch.name!r} needs one label per input")
            else:
                start, stop = self.window_indices(ch)
                if not 0 <= start <= stop < self.length:
                    raise ValueError(f"channel {ch.name!r} window {ch.window} lies outside the schedule")

    @property
    def primary(self) -> Channel:
        return self.channels[0]

    def channel(self, name: str) -> Channel:
        for ch in self.channels:
            if ch.name == name:
                return ch
        raise KeyError(f"gate {self.name!r} has no channel {name!r}")

    @property
    def input_steps(self) -> list[int]:
        return [k * self.inter_bit_gap for k in range(self.arity)]

    @property
    def last_input(self) -> int:
        return (self.arity - 1) * self.inter_bit_gap

    @property
    def length(self) -> int:
        return self.last_input + self.response_window + 1

    def window_indices(self, channel: Channel) -> tuple[int, int]:
        start, stop = channel.window
        start = 0 if start == "first" else self.last_input + int(start)
        return start, self.last_input + int(stop)

    def rows(self) -> list[Bits]:
        return list(itertools.product((0, 1), repeat=self.arity))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "encoding": self.encoding.to_dict(),
            "arity": self.arity,
            "inter_bit_gap": self.inter_bit_gap,
            "read_pulses": [list(p) for p in self.read_pulses],
            "response_window": self.response_window,
            "channels": [ch.to_dict() for ch in self.channels],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "GateSpec":
        return cls(
            name=data["name"],
            description=data.get("description", ""),
            encoding=EncodingScheme.from_dict(data["encoding"]),
            arity=int(data["arity"]),
            inter_bit_gap=int(data.get("inter_bit_gap", 1)),
            read_pulses=tuple(tuple(p) for p in data.get("read_pulses", ())),
            response_window=int(data.get("response_window", 2)),
            channels=tuple(Channel.from_dict(c) for c in data["channels"]),
        )


def load_gate(name_or_path: str | Path) -> GateSpec:
    """Load a bundled preset by name, or a gate JSON document by path."""
    path = Path(name_or_path)
    if str(name_or_path) in PRESET_NAMES:
        text = resources.files("memspike.presets").joinpath(f"gate_{name_or_path}.json").read_text()
    elif path.is_file():
        text = path.read_text()
    else:
        raise ValueError(f"unknown gate {name_or_path!r}; presets are {', '.join(PRESET_NAMES)}")
    return GateSpec.from_dict(json.loads(text))


def _check_inputs(gate: GateSpec, inputs: Sequence[int]) -> Bits:
    inputs = tuple(inputs)
    if len(inputs) != gate.arity:
        raise ValueError(f"{gate.name} takes {gate.arity} input(s), got {len(inputs)}")
    if any(b not in (0, 1) for b in inputs):
        raise ValueError(f"inputs must be bits, got {inputs}")
    return tuple(int(b) for b in inputs)


def build_schedule(gate: GateSpec, inputs: Sequence[int]) -> list[float]:
    bits = _check_inputs(gate, inputs)
    schedule = [0.0] * gate.length
    for t, b in zip(gate.input_steps, bits):
        schedule[t] = gate.encoding.voltage(b)
    for offset, v in gate.read_pulses:
        schedule[gate.last_input + offset] = v
    return schedule


def measure(gate: GateSpec, channel: Channel, trace: Sequence[float]) -> float | list[float]:
    """Statistic of ``channel`` over a trace of currents (one value per input
    step for per-input channels)."""
    if channel.per_input:
        return [channel.statistic.apply([trace[t]]) for t in gate.input_steps]
    start, stop = gate.window_indices(channel)
    return channel.statistic.apply(trace[start : stop + 1])


@dataclass
class GateResult:
    gate: str
    inputs: Bits
    trace: list[CurrentSample]
    statistic_value: float
    decoded: Label
    channels: dict[str, dict] = field(default_factory=dict)
    aux: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "gate": self.gate,
            "inputs": list(self.inputs),
            "statistic_A": self.statistic_value,
            "decoded": self.decoded,
            "channels": self.channels,
            "aux": self.aux,
        }


GateBands = Mapping[str, ThresholdBands]


def _as_band_map(gate: GateSpec, bands: ThresholdBands | GateBands) -> dict[str, ThresholdBands]:
    if isinstance(bands, ThresholdBands):
        return {gate.primary.name: bands}
    return dict(bands)


def run_gate(
    gate: GateSpec,
    inputs: Sequence[int],
    params: DeviceParams,
    bands: ThresholdBands | GateBands,
    device: Device | None = None,
) -> GateResult:
    """Run one input tuple on a fresh or zeroed device and decode every
    channel that has bands. The device is zeroed afterwards."""
    bits = _check_inputs(gate, inputs)
    band_map = _as_band_map(gate, bands)
    if gate.primary.name not in band_map:
        raise KeyError(f"no bands for primary channel {gate.primary.name!r}")
    device = device if device is not None else Device(params)
    if not device.is_erased():
        raise ValueError("device still holds short-term memory; zero it before a gate run")

    trace = device.run(build_schedule(gate, bits))
    device.zero()
    values = [s.i_measured for s in trace]

    channels = {}
    for ch in gate.channels:
        if ch.name not in band_map or ch.per_input:
            continue
        value = measure(gate, ch, values)
        channels[ch.name] = {
            "statistic_A": value,
            "decoded": decode(value, band_map[ch.name]),
            "expected": ch.truth[bits],
        }
    primary = channels[gate.primary.name]
    return GateResult(gate.name, bits, trace, primary["statistic_A"], primary["decoded"], channels)


def _row_currents(gate: GateSpec, bits: Bits, params: DeviceParams) -> list[float]:
    return [s.i_measured for s in run_schedule(params, build_schedule(gate, bits))]


def calibration_traces(gate: GateSpec, params: DeviceParams, workers: int | None = None) -> dict[Bits, list[float]]:
    """Noise-free trace of every truth-table row, each on its own fresh device."""
    params = params.deterministic()
    rows = gate.rows()
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(lambda r: _row_currents(gate, r, params), rows))
    else:
        traces = [_row_currents(gate, r, params) for r in rows]
    return dict(zip(rows, traces))


def _channel_pairs(gate: GateSpec, channel: Channel, traces: Mapping[Bits, Sequence[float]]):
    for bits, trace in traces.items():
        value = measure(gate, channel, trace)
        if channel.per_input:
            yield from zip(channel.truth[bits], value)
        else:
            yield channel.truth[bits], value


def calibrate(
    gate: GateSpec,
    params: DeviceParams,
    channel: str | None = None,
    workers: int | None = None,
) -> ThresholdBands:
    """Derive threshold bands for one channel (the primary by default)."""
    ch = gate.channel(channel) if channel else gate.primary
    traces = calibration_traces(gate, params, workers)
    return bands_from_clusters(clusters_from_pairs(_channel_pairs(gate, ch, traces)), ch.statistic)


def calibrate_gate(gate: GateSpec, params: DeviceParams, workers: int | None = None) -> dict[str, ThresholdBands]:
    """Bands for every channel of ``gate``, keyed by channel name."""
    traces = calibration_traces(gate, params, workers)
    return {
        ch.name: bands_from_clusters(clusters_from_pairs(_channel_pairs(gate, ch, traces)), ch.statistic)
        for ch in gate.channels
    }


def noise_margin_sweep(
    gate: GateSpec,
    params: DeviceParams,
    sigmas: Sequence[float],
    reps: int = 16,
    seed: int = 0,
    channel: str | None = None,
) -> list[tuple[float, float]]:
    """Calibration margin of a channel under Gaussian measurement noise.

    Noise is additive and does not feed back into the device state, so every
    sigma reuses the same standard-normal draws (common random numbers) and
    their negations. Returns ``(sigma, margin)`` pairs; a negative margin
    means the noisy clusters overlap.
    """
    ch = gate.channel(channel) if channel else gate.primary
    clean = calibration_traces(gate, params)
    rng = np.random.default_rng(seed)
    draws = {bits: rng.standard_normal((reps, gate.length)) for bits in clean}
    out = []
    for sigma in sigmas:
        pairs = []
        for bits, trace in clean.items():
            base = np.asarray(trace)
            for z in draws[bits]:
                for sign in (1.0, -1.0):
                    noisy = base + sign * sigma * z
                    pairs.extend(_channel_pairs(gate, ch, {bits: noisy.tolist()}))
        out.append((float(sigma), cluster_margin(clusters_from_pairs(pairs))))
    return out


def not_gate(
    bit: int,
    params: DeviceParams | None = None,
    bands: ThresholdBands | GateBands | None = None,
) -> GateResult:
    """Inverter: the bounce-back one step after a polarity-coded input has
    the opposite sign to the input."""
    gate = load_gate("not")
    params = params or DeviceParams()
    bands = bands if bands is not None else calibrate_gate(gate, params)
    return run_gate(gate, (bit,), params, bands)


def recover_order(
    trace: Sequence[CurrentSample] | Sequence[float],
    gate: GateSpec,
    bands: ThresholdBands | GateBands,
    channel: str = "order",
) -> list[tuple[int, int]]:
    """Read back each input bit from the spike at its input step.

    1-inputs give negative spikes (fresh or attenuated by an earlier 1);
    0-inputs do not.
    """
    values = [s.i_measured if isinstance(s, CurrentSample) else float(s) for s in trace]
    ch = gate.channel(channel)
    order_bands = bands if isinstance(bands, ThresholdBands) else bands[channel]
    out = []
    for t, value in zip(gate.input_steps, measure(gate, ch, values)):
        try:
            label = decode(value, order_bands)
        except Unclassifiable as exc:
            raise OrderAmbiguous(f"input step {t}: {exc}") from exc
        out.append((t, 0 if label == ORDER_ZERO else 1))
    return out


def full_adder(
    a: int,
    b: int,
    c: int,
    params: DeviceParams | None = None,
    bands: GateBands | None = None,
    gate: GateSpec | None = None,
    device: Device | None = None,
) -> GateResult:
    """Three-bit sequential adder on one device.

    The largest positive current after the inputs grows with the number of
    1-inputs, giving the arithmetic sum; the spikes at the input steps give
    back the order the bits arrived in.
    """
    gate = gate or load_gate("full-adder")
    params = params or DeviceParams()
    bands = bands if bands is not None else calibrate_gate(gate, params)
    result = run_gate(gate, (a, b, c), params, bands, device)

    arithmetic = int(result.decoded)
    order = recover_order(result.trace, gate, bands)
    ones = sum(bit for _, bit in order)
    if ones != arithmetic:
        raise OrderAmbiguous(f"recovered {ones} one-input(s) but the arithmetic sum is {arithmetic}")
    values = [s.i_measured for s in result.trace]
    labels = [decode(v, bands["order"]) for v in measure(gate, gate.channel("order"), values)]
    result.aux = {
        "arithmetic_sum": arithmetic,
        "sum_bit": arithmetic % 2,
        "carry": int(arithmetic >= 2),
        "carry_from_negative": int(ORDER_CARRY in labels),
        "order": [list(p) for p in order],
        "order_labels": labels,
    }
    return result


@dataclass
class TruthTableRow:
    inputs: Bits
    statistic: float | None
    decoded: Label | None
    expected: Label
    passed: bool
    error: str | None = None
    aux: dict = field(default_factory=dict)
    trace: list[CurrentSample] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        doc = {
            "inputs": list(self.inputs),
            "statistic_A": self.statistic,
            "decoded": self.decoded,
            "expected": self.expected,
            "pass": self.passed,
        }
        if self.error:
            doc["error"] = self.error
        if self.aux:
            doc["aux"] = self.aux
        return doc


@dataclass
class TruthTableReport:
    gate: str
    rows: list[TruthTableRow]
    margins: dict[str, float | None]

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.rows)

    @property
    def all_pass(self) -> bool:
        return self.passed == len(self.rows)

    def to_dict(self) -> dict:
        return {
            "gate": self.gate,
            "rows": [r.to_dict() for r in self.rows],
            "margins": self.margins,
            "passed": self.passed,
            "total": len(self.rows),
        }


def truth_table(
    gate: GateSpec,
    params: DeviceParams,
    bands: GateBands | None = None,
    device: Device | None = None,
) -> TruthTableReport:
    """Run every input row on one device, zeroing between rows, and score
    the primary channel against its ground truth.

    The full adder also has its sum bit, carry and recovered order checked
    against the full-adder table.
    """
    bands = dict(bands) if bands is not None else calibrate_gate(gate, params)
    device = device if device is not None else Device(params)
    is_adder = "order" in {ch.name for ch in gate.channels} and gate.arity == 3
    rows = []
    for bits in gate.rows():
        expected = gate.primary.truth[bits]
        try:
            if is_adder:
                res = full_adder(*bits, params=params, bands=bands, gate=gate, device=device)
                sum_bit, carry, arith = FULL_ADDER_TABLE[bits]
                recovered = tuple(bit for _, bit in res.aux["order"])
                ok = (
                    res.decoded == expected == arith
                    and res.aux["sum_bit"] == sum_bit
                    and res.aux["carry"] == carry
                    and recovered == bits
                )
            else:
                res = run_gate(gate, bits, params, bands, device)
                ok = res.decoded == expected
            rows.append(TruthTableRow(bits, res.statistic_value, res.decoded, expected, ok, aux=res.aux, trace=res.trace))
        except MemspikeError as exc:
            device.zero()
            rows.append(TruthTableRow(bits, None, None, expected, False, error=f"{type(exc).__name__}: {exc}"))
    return TruthTableReport(gate.name, rows, {name: b.margin for name, b in bands.items()})


def t1_response(first: float, second: float, params: DeviceParams) -> float:
    """Current one step after two consecutive inputs, with 0 V applied."""
    return run_schedule(params.deterministic(), [first, second, 0.0])[2].i_measured


def directionality_margin(scheme: EncodingScheme, params: DeviceParams) -> float:
    """``|i_t1(1 -> 0) - i_t1(0 -> 1)|``: how far input order changes the response."""
    one, nil = scheme.voltage(1), scheme.voltage(0)
    return abs(t1_response(one, nil, params) - t1_response(nil, one, params))
