"""Mean field equation toolkit on the flat unit torus."""

from ._mflab import (
    Error,
    NumericalError,
    RadialProfile,
    ValidationError,
    admissible_eta_interval,
    build_bubble,
    classify_local_mass,
    coercive_region,
    el_residual,
    evaluate_J,
    limit_mass,
    min_mass_rho2,
    pohozaev_residual,
    sharp_threshold,
    shoot,
    solve,
    solve_gamma_m,
    verify_pohozaev,
    wasserstein1,
)

__all__ = [
    "Error",
    "NumericalError",
    "RadialProfile",
    "ValidationError",
    "admissible_eta_interval",
    "build_bubble",
    "classify_local_mass",
    "coercive_region",
    "el_residual",
    "evaluate_J",
    "limit_mass",
    "min_mass_rho2",
    "pohozaev_residual",
    "sharp_threshold",
    "shoot",
    "solve",
    "solve_gamma_m",
    "verify_pohozaev",
    "wasserstein1",
]
