"""Exception hierarchy shared by every flipsim module."""


class FlipError(Exception):
    """Base class for all flipsim errors."""


class GraphFormatError(FlipError):
    """Malformed edge-list input. ``line`` is 1-based, or None for whole-file problems."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphError(FlipError):
    """Graph violates a structural invariant (duplicate edge, bad id, ...)."""


class InfeasibleParameters(FlipError):
    """Generator parameters cannot be satisfied."""


class ConfigError(FlipError):
    """Invalid architecture or run configuration."""


class OffsetOverflow(FlipError):
    """Displacement does not fit in the hop fields."""


class TableOverflow(FlipError):
    """Inter- or Intra-Table of a PE/slice exceeds its configured size."""


class CapacityError(FlipError):
    """Graph does not fit the (replicated) PE array."""


class SpmOverflow(ConfigError):
    """Parked packets exceed the scratchpad capacity."""


class Livelock(FlipError):
    """Simulator watchdog fired: no forward progress."""


class TraceError(FlipError):
    """Trace is incomplete or inconsistent with its run."""
