"""Nonlocal elastodynamics with a pairwise kernel force.

Simulator plus a verification harness for the whole-domain conservation
laws of the model and the zero-mean properties of their pointwise
localization residuals.
"""

from .conservation import (
    BoundaryFluxes,
    ConservedQuantities,
    DiagnosticsSeries,
    ResidualFields,
    balance_residuals,
    boundary_fluxes,
    conserved_quantities,
    residual_angular_field,
    residual_energy_field,
    residual_eshelby_field,
    residual_fields,
    residual_momentum_field,
    zero_mean_verdicts,
)
from .config import ConfigError, config_to_dict, load_config, parse_config
from .dynamics import (
    MaterialModel,
    ScenarioConfig,
    SolverDivergence,
    State,
    apply_boundary,
    build_scenario,
    internal_force,
    lagrangian_density,
    stability_limit,
    step,
    stress,
)
from .kernels import KernelSpec, check_symmetry, eval_dh_ds, eval_g, eval_h, eval_kappa
from .mesh import DomainGrid, Field, boundary_integrate, build_grid, divergence, gradient, integrate
from .operators import (
    NonlocalContext,
    double_integral_hru,
    interchange_gap,
    nonlocal_argument,
    variation_identity_gap,
    weighted_traction,
    zero_mean_gap,
)
from .simulate import run

__version__ = "0.1.0"
