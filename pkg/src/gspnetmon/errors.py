"""Exception types shared across the package."""


class GraphError(ValueError):
    """Invalid graph construction input (unknown endpoint, self loop, bad shape)."""


class DimensionError(ValueError):
    """Array or matrix dimensions do not match the graph they are used with."""


class CapacityError(RuntimeError):
    """Problem size exceeds the dense-solver cap; use the Chebyshev path instead."""


class CalibrationError(ValueError):
    """Not enough baseline data to calibrate a detection threshold."""


class TelemetryError(ValueError):
    """Telemetry stream is incomplete or inconsistent for an interval."""


class UsageError(RuntimeError):
    """An operation was invoked out of order (e.g. localization before detection)."""
