"""Spread, spread dimension and S-pseudo spread dimension of finite metric spaces."""

__version__ = "0.1.0"

from .datasets import sample_subset, swiss_roll, uniform_hypercube
from .experiments import (
    CoverageReport,
    DimensionEstimate,
    DimensionProfile,
    coverage_validation,
    dimension_profile,
    estimate_intrinsic_dimension,
)
from .metric_space import (
    DistanceMatrix,
    PartialDistanceMatrix,
    PointCloud,
    SubsetIndex,
    euclidean_distances,
    load_distance_matrix,
    load_points,
    partial_distances,
)
from .spread import (
    ScaleGrid,
    full_sweep,
    phi,
    phi_sample,
    pseudo_spread,
    pseudo_spread_dimension,
    psi,
    psi_sample,
    spread,
    spread_dimension,
    sweep_profile,
)
from .uncertainty import (
    DimensionEstimateAtScale,
    confidence_interval,
    dimension_variance,
    population_covariance,
    population_variance,
    ratio_variance,
)
