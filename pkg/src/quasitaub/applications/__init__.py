"""Drivers built on the transform: heat-type Cauchy problems and Laplace/Littlewood summability."""

from .heat import (CauchyProblem, check_d_curve_stabilization, evolve_samples, solve_cauchy,
                   time_stabilization)
from .laplace import (ConeSeries, OmegaRegion, builtin_series, laplace_eval, littlewood_analyze,
                      omega_bound_check, read_series_csv)

__all__ = [
    "CauchyProblem", "solve_cauchy", "evolve_samples", "check_d_curve_stabilization", "time_stabilization",
    "ConeSeries", "OmegaRegion", "builtin_series", "read_series_csv", "laplace_eval", "omega_bound_check",
    "littlewood_analyze",
]
