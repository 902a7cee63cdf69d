class MemspikeError(Exception):
    """Base class for decode and calibration failures."""


class Unclassifiable(MemspikeError):
    """A statistic fell outside every band (usually a mis-calibration)."""

    def __init__(self, value: float, message: str | None = None):
        self.value = value
        super().__init__(message or f"value {value!r} lies outside every threshold band")


class NotSeparable(MemspikeError):
    """Two response clusters overlap, so no threshold can split them."""

    def __init__(self, lower, upper, margin: float):
        self.lower = lower
        self.upper = upper
        self.margin = margin
        super().__init__(
            f"classes {lower!r} and {upper!r} overlap (margin {margin:.6g} A)"
        )


class OrderAmbiguous(MemspikeError):
    """Input-step samples could not be assigned consistently to input bits."""
