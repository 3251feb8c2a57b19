"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to.
"""


class WeakChaosError(Exception):
    exit_code = 1


class ConfigError(WeakChaosError, ValueError):
    """Invalid parameters, descriptors or run configuration."""

    exit_code = 2


class DomainError(ConfigError):
    """A point lies outside the domain of a map."""


class CapabilityError(ConfigError):
    """The requested operation is not available for this map."""


class PrecisionError(WeakChaosError, ArithmeticError):
    """A guaranteed error bound cannot be met at the available precision."""

    exit_code = 3


class ResourceError(PrecisionError):
    """The precision needed exceeds the configured hard cap."""


class ScaleError(PrecisionError):
    """A scale is finer than the resolution of the point set."""


class SampleSizeError(ConfigError):
    """The input is too short for the requested statistic."""


class CodingError(WeakChaosError):
    """A point is not covered by any cover element."""

    exit_code = 4


class CoverageError(CodingError):
    """A point is not within reach of any net center."""


class UsageError(ConfigError):
    """Inconsistent arguments, e.g. estimates fitted under different clocks."""
