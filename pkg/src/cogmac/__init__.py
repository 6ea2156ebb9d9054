"""Cognitive multiple-access channel: capacity region and sum-rate optimal
power splitting under a primary-rate-preservation constraint."""

__version__ = "0.1.0"

from .channel import (
    ChannelInstance,
    DimensionMismatchError,
    PowerSplit,
    UndefinedCoordinateError,
    baseline_primary_rate,
    feasibility_residual,
    primary_rate,
    relative_residual,
    residual_scale,
    solve_feasible_coordinate,
    sum_rate,
)
from .oracle import (
    KktReport,
    OracleResult,
    grid_search,
    instance_suite,
    kkt_check,
    random_instance,
    single_user_closed_form,
)
from .region import (
    RatePolytope,
    RegionBoundary,
    UnsupportedSizeError,
    pentagon_vertices,
    polytope_for_gamma,
    region_boundary,
    sample_feasible_set,
)
from .solver import (
    ActiveSetState,
    SolverConfig,
    SolverResult,
    SolverStatus,
    solve_max_sum_rate,
    sweep_trajectory,
)

__all__ = [
    "ChannelInstance",
    "PowerSplit",
    "DimensionMismatchError",
    "UndefinedCoordinateError",
    "UnsupportedSizeError",
    "baseline_primary_rate",
    "primary_rate",
    "feasibility_residual",
    "relative_residual",
    "residual_scale",
    "sum_rate",
    "solve_feasible_coordinate",
    "SolverConfig",
    "SolverResult",
    "SolverStatus",
    "ActiveSetState",
    "solve_max_sum_rate",
    "sweep_trajectory",
    "RatePolytope",
    "RegionBoundary",
    "polytope_for_gamma",
    "pentagon_vertices",
    "sample_feasible_set",
    "region_boundary",
    "OracleResult",
    "KktReport",
    "grid_search",
    "kkt_check",
    "single_user_closed_form",
    "random_instance",
    "instance_suite",
]
