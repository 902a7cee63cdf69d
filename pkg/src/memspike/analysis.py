"""Logical efficiency and the wire/time-step trade of sequential gates."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping

from .gates import FULL_ADDER_TABLE, GateSpec, TruthTableReport


@dataclass(frozen=True)
class EfficiencyReport:
    input_count: int
    class_count: int
    efficiency: Fraction

    def to_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "class_count": self.class_count,
            "efficiency": str(self.efficiency),
            "efficiency_percent": float(self.efficiency * 100),
        }


def logical_efficiency(table: Mapping[Hashable, Hashable]) -> EfficiencyReport:
    """Distinguishable output classes per possible input tuple."""
    if not table:
        raise ValueError("truth table is empty")
    classes = len(set(table.values()))
    # kept unreduced in the counts, exact in the ratio
    return EfficiencyReport(len(table), classes, Fraction(classes, len(table)))


def half_adder_table() -> dict[tuple[int, int], int]:
    return {(a, b): a + b for a in (0, 1) for b in (0, 1)}


def full_adder_table() -> dict[tuple[int, int, int], int]:
    return {bits: arith for bits, (_, _, arith) in FULL_ADDER_TABLE.items()}


def spiking_full_adder_classes(report: TruthTableReport) -> dict[tuple[int, ...], tuple]:
    """Output class of each simulated full-adder row: the decoded arithmetic
    sum together with the recovered input order."""
    out = {}
    for row in report.rows:
        if row.error:
            raise ValueError(f"row {row.inputs} failed: {row.error}")
        order = tuple(bit for _, bit in row.aux["order"])
        out[row.inputs] = (row.decoded, order)
    return out


@dataclass(frozen=True)
class SpaceTimeReport:
    input_wires: int
    input_timesteps: int
    output_channels: int
    reference_wires: int
    reference_timesteps: int
    conversion_ratio: Fraction | None

    def to_dict(self) -> dict:
        return {
            "input_wires": self.input_wires,
            "input_timesteps": self.input_timesteps,
            "output_channels": self.output_channels,
            "reference_wires": self.reference_wires,
            "reference_timesteps": self.reference_timesteps,
            "conversion_ratio": None if self.conversion_ratio is None else str(self.conversion_ratio),
        }


def spacetime_report(gate: GateSpec) -> SpaceTimeReport:
    """Compare the single-wire sequential gate with a parallel gate that takes
    every input on its own wire in one step.

    The ratio is wires saved per extra time-step; ``None`` when no time-step
    is added (arity 1).
    """
    wires, steps = 1, gate.arity
    ref_wires, ref_steps = gate.arity, 1
    denom = steps - ref_steps
    ratio = Fraction(ref_wires - wires, denom) if denom else None
    return SpaceTimeReport(wires, steps, len(gate.channels), ref_wires, ref_steps, ratio)


def format_ratio(ratio: Fraction | None) -> str:
    return "undefined" if ratio is None else f"{ratio.numerator}:{ratio.denominator}"


def format_report(eff: EfficiencyReport, st: SpaceTimeReport | None = None, title: str = "") -> str:
    lines = [title] if title else []
    lines.append(f"  inputs            {eff.input_count}")
    lines.append(f"  output classes    {eff.class_count}")
    lines.append(f"  efficiency        {eff.class_count}/{eff.input_count} ({float(eff.efficiency) * 100:.0f}%)")
    if st is not None:
        ratio = format_ratio(st.conversion_ratio)
        lines.append(f"  wires x steps     {st.input_wires} x {st.input_timesteps} (parallel: {st.reference_wires} x {st.reference_timesteps})")
        lines.append(f"  wire:step ratio   {ratio}")
    return "\n".join(lines)
