"""Orbit complexity, sensitivity radii and fractal dimension of simple maps."""
from .catalog import MapDescriptor, Orbit, iterate, iterate_exact, modulus, random_point, trajectory
from .coding import GridQuantizer, SymbolSequence, binary_partition, quantized_orbit, symbolic_orbit
from .complexity import GrowthFit, GrowthLawRegressor, ScalingLaw, fit_growth, orbit_complexity_profile
from .dimension import BoxCountingDimension, box_dimension, greedy_net, local_measure_dimension, orbit_closure_dimension
from .errors import (
    CapabilityError,
    CodingError,
    ConfigError,
    CoverageError,
    DomainError,
    PrecisionError,
    ResourceError,
    SampleSizeError,
    ScaleError,
    UsageError,
    WeakChaosError,
)
from .infocontent import InfoCurve, block_entropy, compressed_bits, info_curve
from .report import build_report, check_lower, check_radius_bounds, check_upper
from .sensitivity import SensitivityRegressor, fit_sensitivity, inner_radius, outer_radius, sensitivity_curve

__version__ = "0.1.0"
