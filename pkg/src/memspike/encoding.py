"""Logical value to voltage encodings and threshold-band decoding."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import NotSeparable, Unclassifiable

Label = Hashable


class Kind(str, Enum):
    MAGNITUDE = "magnitude"
    POLARITY = "polarity"
    MIXED1 = "mixed1"
    MIXED2 = "mixed2"


@dataclass(frozen=True)
class EncodingScheme:
    kind: Kind
    M: float
    m: float

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not (math.isfinite(self.M) and math.isfinite(self.m)):
            raise ValueError("M and m must be finite")
        if not abs(self.M) > abs(self.m) > 0:
            raise ValueError(f"need |M| > |m| > 0, got M={self.M}, m={self.m}")

    def voltage(self, bit: int) -> float:
        if bit not in (0, 1) or isinstance(bit, float):
            raise ValueError(f"bit must be 0 or 1, got {bit!r}")
        M, m = abs(self.M), abs(self.m)
        if self.kind is Kind.MAGNITUDE:
            # magnitude logic keeps the configured signs
            return self.M if bit else self.m
        if self.kind is Kind.POLARITY:
            return M if bit else -M
        if self.kind is Kind.MIXED1:
            return M if bit else -m
        return -M if bit else m

    def scaled(self, factor: float) -> "EncodingScheme":
        return EncodingScheme(self.kind, self.M * factor, self.m * factor)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "M": self.M, "m": self.m}

    @classmethod
    def from_dict(cls, data: Mapping) -> "EncodingScheme":
        return cls(Kind(data["kind"]), float(data["M"]), float(data["m"]))


def encode_bit(scheme: EncodingScheme, bit: int) -> float:
    return scheme.voltage(bit)


class Statistic(str, Enum):
    VALUE_AT_STEP = "value_at_step"
    MAX_POSITIVE = "max_positive"
    MIN_NEGATIVE = "min_negative"
    ABS_VALUE_AT_STEP = "abs_value_at_step"

    def apply(self, window: Sequence[float]) -> float:
        """Reduce the currents in a measurement window to one number."""
        if len(window) == 0:
            raise ValueError("empty measurement window")
        if self in (Statistic.VALUE_AT_STEP, Statistic.ABS_VALUE_AT_STEP):
            if len(window) != 1:
                raise ValueError(f"{self.value} needs a single-step window, got {len(window)} steps")
            return abs(window[0]) if self is Statistic.ABS_VALUE_AT_STEP else float(window[0])
        if self is Statistic.MAX_POSITIVE:
            return float(max(window))
        return float(min(window))


@dataclass(frozen=True)
class Band:
    lower: float
    upper: float
    label: Label

    def contains(self, value: float) -> bool:
        return self.lower <= value < self.upper


@dataclass(frozen=True)
class ThresholdBands:
    """Ordered, disjoint current intervals, closed below and open above.

    ``margin`` is the smallest gap between adjacent calibration clusters,
    when the bands came from calibration.
    """

    bands: tuple[Band, ...]
    statistic: Statistic
    margin: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple(self.bands))
        object.__setattr__(self, "statistic", Statistic(self.statistic))
        if not self.bands:
            raise ValueError("at least one band is required")
        labels = [b.label for b in self.bands]
        if len(set(labels)) != len(labels):
            raise ValueError(f"band labels must be unique: {labels}")
        for b in self.bands:
            if not b.lower < b.upper:
                raise ValueError(f"empty band {b}")
        for lo, hi in zip(self.bands, self.bands[1:]):
            if hi.lower < lo.upper:
                raise ValueError(f"bands overlap or are unordered: {lo} / {hi}")

    @property
    def labels(self) -> list[Label]:
        return [b.label for b in self.bands]

    @property
    def thresholds(self) -> list[float]:
        """Interior boundaries of a gapless band set."""
        return [b.lower for b in self.bands[1:]]

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic.value,
            "margin": self.margin,
            "bands": [
                {
                    "lower": None if b.lower == -math.inf else b.lower,
                    "upper": None if b.upper == math.inf else b.upper,
                    "label": b.label,
                }
                for b in self.bands
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ThresholdBands":
        bands = [
            Band(
                -math.inf if b["lower"] is None else float(b["lower"]),
                math.inf if b["upper"] is None else float(b["upper"]),
                b["label"],
            )
            for b in data["bands"]
        ]
        return cls(tuple(bands), Statistic(data["statistic"]), data.get("margin"))


def decode(value: float, bands: ThresholdBands) -> Label:
    """Return the label of the band holding ``value``."""
    for band in bands.bands:
        if band.contains(value):
            return band.label
    raise Unclassifiable(value)


@dataclass
class ResponseCluster:
    label: Label
    samples: list[float] = field(default_factory=list)

    @property
    def min(self) -> float:
        return min(self.samples)

    @property
    def max(self) -> float:
        return max(self.samples)


def clusters_from_pairs(pairs: Iterable[tuple[Label, float]]) -> list[ResponseCluster]:
    by_label: dict[Label, ResponseCluster] = {}
    for label, value in pairs:
        by_label.setdefault(label, ResponseCluster(label)).samples.append(value)
    return list(by_label.values())


def bands_from_clusters(clusters: Sequence[ResponseCluster], statistic: Statistic) -> ThresholdBands:
    """Place thresholds midway between the extrema of neighbouring clusters.

    Raises NotSeparable if any two neighbouring clusters touch or overlap.
    """
    if not clusters:
        raise ValueError("no clusters to calibrate from")
    ordered = sorted(clusters, key=lambda c: (c.min, c.max))
    margin = math.inf
    for lo, hi in zip(ordered, ordered[1:]):
        gap = hi.min - lo.max
        if gap <= 0:
            raise NotSeparable(lo.label, hi.label, gap)
        margin = min(margin, gap)

    # the midpoint can round onto lo.max when the gap is a few ulps
    cuts = [max((lo.max + hi.min) / 2, math.nextafter(lo.max, math.inf)) for lo, hi in zip(ordered, ordered[1:])]
    edges = [-math.inf, *cuts, math.inf]
    bands = tuple(Band(edges[k], edges[k + 1], c.label) for k, c in enumerate(ordered))
    return ThresholdBands(bands, statistic, None if margin == math.inf else margin)


def cluster_margin(clusters: Sequence[ResponseCluster]) -> float:
    """Smallest gap between neighbouring clusters; negative when they overlap."""
    ordered = sorted(clusters, key=lambda c: (c.min, c.max))
    gaps = [hi.min - lo.max for lo, hi in zip(ordered, ordered[1:])]
    return min(gaps) if gaps else math.inf


def save_bands(bands: Mapping[str, ThresholdBands], path: str | Path, **meta) -> None:
    doc = dict(meta)
    doc["channels"] = {name: b.to_dict() for name, b in bands.items()}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_bands(path: str | Path) -> dict[str, ThresholdBands]:
    doc = json.loads(Path(path).read_text())
    return {name: ThresholdBands.from_dict(b) for name, b in doc["channels"].items()}


def measured_reference_bands(gate: str = "full-adder") -> dict[str, ThresholdBands]:
    """Band sets reported for physical devices (amperes). Reference only:
    simulated decoding always uses calibrated bands."""
    from importlib import resources

    doc = json.loads(resources.files("memspike.presets").joinpath("measured_device_bands.json").read_text())
    return {name: ThresholdBands.from_dict(b) for name, b in doc[gate]["channels"].items()}
