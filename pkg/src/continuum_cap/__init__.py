"""Capacity limits of a single cell serving a spatial continuum of users."""

__version__ = "0.1.0"

from .scenario import (  # noqa: E402
    NoiseDistribution,
    PathlossModel,
    PointMass,
    RadialProfile,
    Scenario,
    TrafficProfile,
    UniformDensity,
    derive_noise_distribution,
    disk_noise_distribution,
    narrow_noise_distribution,
    noise_at,
    traffic_to_noise_distribution,
)
from .scbc import (  # noqa: E402
    CapacityResult,
    disk_min_power_closed,
    disk_uniform_capacity,
    max_sum_rate,
    min_power,
    min_power_ode,
    uniform_capacity,
)
from .partition import (  # noqa: E402
    LayeredAllocation,
    Partition,
    bounded_capacity,
    downlink_allocation,
    sandwich_bounds,
    split,
    split_uniform_mass,
    time_sharing_capacity,
)
from .scmac import UplinkAllocation, uplink_allocation, verify_duality  # noqa: E402

__all__ = [
    "NoiseDistribution", "PathlossModel", "PointMass", "RadialProfile", "Scenario", "TrafficProfile",
    "UniformDensity", "derive_noise_distribution", "disk_noise_distribution", "narrow_noise_distribution",
    "noise_at", "traffic_to_noise_distribution",
    "CapacityResult", "disk_min_power_closed", "disk_uniform_capacity", "max_sum_rate", "min_power",
    "min_power_ode", "uniform_capacity",
    "LayeredAllocation", "Partition", "bounded_capacity", "downlink_allocation", "sandwich_bounds", "split",
    "split_uniform_mass", "time_sharing_capacity",
    "UplinkAllocation", "uplink_allocation", "verify_duality",
]
