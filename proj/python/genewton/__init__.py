"""Newton-type methods for generalized equations under disturbances.

Thin python surface over the C++ core: box geometry, the mixed-AVI
subproblem solvers, the experiment runner on the built-in problem registry,
and the ISS gain estimators.
"""

from genewton._core import (
    Box,
    ConfigurationError,
    IssEstimate,
    MixedAvi,
    NormalConeCertificate,
    RegularityEstimate,
    SolverError,
    estimate_iss_gains,
    estimate_kappa,
    list_problems,
    natural_residual,
    normal_cone_contains,
    project_box,
    solve,
    solve_avi_enumerate,
    solve_avi_semismooth,
)

__all__ = [
    "Box",
    "ConfigurationError",
    "IssEstimate",
    "MixedAvi",
    "NormalConeCertificate",
    "RegularityEstimate",
    "SolverError",
    "estimate_iss_gains",
    "estimate_kappa",
    "list_problems",
    "natural_residual",
    "normal_cone_contains",
    "project_box",
    "solve",
    "solve_avi_enumerate",
    "solve_avi_semismooth",
]
