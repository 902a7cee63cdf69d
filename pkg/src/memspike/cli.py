"""memspike command line.

Exit codes: 0 success, 1 assertion or decoding failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from .analysis import (
    format_ratio,
    format_report,
    full_adder_table,
    half_adder_table,
    logical_efficiency,
    spacetime_report,
    spiking_full_adder_classes,
)
from .device import Device, DeviceParams, load_params, run_schedule, write_trace_csv
from .encoding import load_bands, save_bands
from .errors import MemspikeError
from .experiments import EXPERIMENT_NAMES, run_experiment
from .gates import PRESET_NAMES, calibrate_gate, full_adder, load_gate, run_gate, truth_table

log = logging.getLogger("memspike")

SCHEDULE_PRESETS = ("square-wave",)


class UsageError(Exception):
    pass


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_schedule(text: str, source: str = "<schedule>") -> list[float]:
    """One voltage per line, or ``step,voltage_V`` CSV rows (header optional).

    Blank lines and ``#`` comments are skipped.
    """
    voltages = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if fields == ["step", "voltage_V"]:
            continue
        try:
            if len(fields) == 1:
                value = float(fields[0])
            elif len(fields) == 2:
                int(fields[0])
                value = float(fields[1])
            else:
                raise ValueError
        except ValueError:
            raise UsageError(f"{source}: line {lineno}: cannot parse {raw.strip()!r}") from None
        voltages.append(value)
    if not voltages:
        raise UsageError(f"{source}: no voltages found")
    return voltages


def _read_schedule(arg: str) -> tuple[list[float], str]:
    path = Path(arg)
    if path.is_file():
        return parse_schedule(path.read_text(), str(path)), path.stem
    if arg in SCHEDULE_PRESETS:
        text = resources.files("memspike.presets").joinpath(f"schedule_{arg}.txt").read_text()
        return parse_schedule(text, arg), arg.replace("-", "_")
    raise UsageError(f"schedule file not found: {arg}")


def cmd_simulate(args, params: DeviceParams) -> int:
    schedule, stem = _read_schedule(args.file)
    trace = run_schedule(params, schedule, rng=Device(params, args.seed).rng)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stem}_trace.csv"
    write_trace_csv(trace, path)
    print(f"wrote {len(trace)} samples to {path}")
    return 0


def _bits(values: list[str]) -> tuple[int, ...]:
    try:
        bits = tuple(int(v) for v in values)
    except ValueError:
        raise UsageError(f"inputs must be 0 or 1, got {' '.join(values)}") from None
    if any(b not in (0, 1) for b in bits):
        raise UsageError(f"inputs must be 0 or 1, got {' '.join(values)}")
    return bits


def cmd_gate(args, params: DeviceParams) -> int:
    try:
        gate = load_gate(args.name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not (args.bits or args.table or args.calibrate):
        raise UsageError("give input bits, --table or --calibrate")
    bits = _bits(args.bits) if args.bits else None
    if bits is not None and len(bits) != gate.arity:
        raise UsageError(f"{gate.name} takes {gate.arity} input(s), got {len(bits)}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = gate.name.replace("-", "_")
    status = 0

    if args.bands:
        bands = load_bands(args.bands)
    else:
        bands = calibrate_gate(gate, params)
    if args.calibrate:
        path = out / f"{stem}_bands.json"
        save_bands(bands, path, gate=gate.name, encoding=gate.encoding.to_dict())
        for name, b in bands.items():
            cuts = ", ".join(f"{t:.6g}" for t in b.thresholds)
            print(f"{name}: {b.statistic.value} thresholds [{cuts}] margin {b.margin:.6g} A")
        print(f"wrote {path}")

    device = Device(params, args.seed)
    if args.table:
        report = truth_table(gate, params, bands, device)
        (out / f"{stem}_table.json").write_text(_dump(report.to_dict()))
        for row in report.rows:
            flag = "PASS" if row.passed else "FAIL"
            inputs = "".join(map(str, row.inputs))
            print(f"{flag} {inputs} -> {row.decoded} (expected {row.expected})" + (f" {row.error}" if row.error else ""))
            if args.traces and row.trace:
                write_trace_csv(row.trace, out / f"{stem}_{inputs}.csv")
        print(f"{report.passed}/{len(report.rows)} rows pass")
        if not report.all_pass:
            status = 1

    if bits is not None:
        if gate.name == "full-adder":
            result = full_adder(*bits, params=params, bands=bands, gate=gate, device=device)
        else:
            result = run_gate(gate, bits, params, bands, device)
        inputs = "".join(map(str, bits))
        (out / f"{stem}_{inputs}.json").write_text(_dump(result.to_dict()))
        if args.traces:
            write_trace_csv(result.trace, out / f"{stem}_{inputs}.csv")
        print(f"{gate.name} {' '.join(map(str, bits))} -> {result.decoded} (statistic {result.statistic_value:.6g} A)")
        if result.aux:
            print(_dump(result.aux), end="")
    return status


def cmd_experiment(args, params: DeviceParams) -> int:
    if args.name not in EXPERIMENT_NAMES:
        raise UsageError(f"unknown experiment {args.name!r}; valid names: {', '.join(EXPERIMENT_NAMES)}")
    summary = run_experiment(args.name, params, args.out, args.seed)
    for key, ok in summary["assertions"].items():
        shown = "n/a" if ok is None else str(ok).lower()
        print(f"{key}: {shown}")
    return 0 if summary["passed"] else 1


def cmd_analyze(args, params: DeviceParams) -> int:
    print(format_report(logical_efficiency(half_adder_table()), title="half adder"))
    print(format_report(logical_efficiency(full_adder_table()), title="standard full adder"))
    gate = load_gate("full-adder")
    report = truth_table(gate, params, device=Device(params, args.seed))
    spiking = logical_efficiency(spiking_full_adder_classes(report))
    print(format_report(spiking, spacetime_report(gate), title="spiking full adder (simulated)"))
    for name in ("not", "xor"):
        st = spacetime_report(load_gate(name))
        print(f"{name}: {st.input_wires} wire x {st.input_timesteps} step(s), ratio {format_ratio(st.conversion_ratio)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="device parameter JSON file")
    common.add_argument("--out", help="output directory (default: memspike-out)")
    common.add_argument("--seed", type=int, help="seed for measurement noise (default: 0)")

    parser = argparse.ArgumentParser(prog="memspike", description=__doc__, parents=[common])
    parser.set_defaults(params=None, out="memspike-out", seed=0)
    sub = parser.add_subparsers(dest="command", required=True)

    # subcommands accept the global flags too, without clobbering them
    sub_common = argparse.ArgumentParser(add_help=False)
    for action in common._actions:
        sub_common.add_argument(*action.option_strings, type=action.type, default=argparse.SUPPRESS, help=action.help)

    p = sub.add_parser("simulate", parents=[sub_common], help="run a voltage schedule and write the trace CSV")
    p.add_argument("file", help=f"schedule file, or a bundled schedule: {', '.join(SCHEDULE_PRESETS)}")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gate", parents=[sub_common], help="run, tabulate or calibrate a gate")
    p.add_argument("name", help=f"preset ({', '.join(PRESET_NAMES)}) or gate JSON file")
    p.add_argument("bits", nargs="*", help="input bits")
    p.add_argument("--table", action="store_true", help="run every truth-table row")
    p.add_argument("--calibrate", action="store_true", help="write calibrated bands JSON")
    p.add_argument("--bands", help="bands JSON to decode with instead of calibrating")
    p.add_argument("--traces", action="store_true", help="also write per-run trace CSVs")
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("experiment", parents=[sub_common], help="run a bundled experiment")
    p.add_argument("name", help=", ".join(EXPERIMENT_NAMES))
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("analyze", parents=[sub_common], help="logical efficiency and wire/step report")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params = load_params(args.params) if args.params else DeviceParams()
    except (OSError, ValueError, TypeError) as exc:
        log.error("cannot load device parameters: %s", exc)
        return 2
    try:
        return args.func(args, params)
    except UsageError as exc:
        log.error("%s", exc)
        return 2
    except MemspikeError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
