"""Numerical geometry of Lagrangian and Finslerian mechanical systems.

The package evaluates, at machine precision via forward-mode jets, the
canonical and forced (evolution) semisprays of a regular Lagrangian,
their nonlinear connections, the Cartan forms and tensor, dissipation
and symplectic-compatibility diagnostics, and integrates evolution,
horizontal and geodesic curves.
"""

from .dsl import (
    SystemConfig,
    bind_scalar,
    bind_vertical,
    evaluate,
    parse,
    to_source,
)
from .errors import (
    ArityError,
    ConfigError,
    DomainError,
    FinslerModeError,
    LagmechError,
    ParseError,
    SingularMetric,
    UnboundParameter,
    UnknownBuiltin,
    VariableIndexError,
)
from .finsler import (
    FinslerIdentityReport,
    HomogeneityReport,
    christoffel_at,
    finsler_identities,
    homogeneity_report,
)
from .geometry import (
    LagrangeGeometry,
    canonical_connection_at,
    canonical_spray_at,
    cartan_tensor_at,
    dyn_cov_deriv_g,
    energy_at,
    lagrange_geometry,
    metric_at,
    spray_equation_residual,
    theta_at,
    two_form_eval,
)
from .jets import (
    Dual,
    Jet,
    SymMatrix,
    eval_jet,
    fd_oracle,
    jacobian_y,
    push_direction,
    sym_invert,
)
from .mechanics import (
    ClassificationReport,
    EvolutionBundle,
    MechanicalSystem,
    classify,
    dissipation_power,
    evolution_bundle_at,
    evolution_connection_at,
    evolution_equation_residual,
    evolution_spray_at,
    first_integral_conditions,
    horizontal_dE,
    horizontal_dL,
    lie_theta_residual,
    sigma_at,
    symplectic_defect,
)
from .phase import PhasePoint, ScalarField, VerticalField
from .sampling import halton, sample_box
from .systems import BuiltinEntry, catalog, find, instantiate, standard_samples
from .trajectories import (
    IntegratorConfig,
    Trajectory,
    energy_audit,
    integrate_evolution,
    integrate_geodesic,
    integrate_horizontal,
)
from .verify import run_verification

__version__ = "0.1.0"

__all__ = [
    "ArityError",
    "BuiltinEntry",
    "ClassificationReport",
    "ConfigError",
    "DomainError",
    "Dual",
    "EvolutionBundle",
    "FinslerIdentityReport",
    "FinslerModeError",
    "HomogeneityReport",
    "IntegratorConfig",
    "Jet",
    "LagmechError",
    "LagrangeGeometry",
    "MechanicalSystem",
    "ParseError",
    "PhasePoint",
    "ScalarField",
    "SingularMetric",
    "SymMatrix",
    "SystemConfig",
    "Trajectory",
    "UnboundParameter",
    "UnknownBuiltin",
    "VariableIndexError",
    "VerticalField",
    "bind_scalar",
    "bind_vertical",
    "canonical_connection_at",
    "canonical_spray_at",
    "cartan_tensor_at",
    "catalog",
    "classify",
    "christoffel_at",
    "dissipation_power",
    "dyn_cov_deriv_g",
    "energy_at",
    "energy_audit",
    "eval_jet",
    "evaluate",
    "evolution_bundle_at",
    "evolution_connection_at",
    "evolution_equation_residual",
    "evolution_spray_at",
    "fd_oracle",
    "find",
    "finsler_identities",
    "first_integral_conditions",
    "halton",
    "homogeneity_report",
    "horizontal_dE",
    "horizontal_dL",
    "instantiate",
    "integrate_evolution",
    "integrate_geodesic",
    "integrate_horizontal",
    "jacobian_y",
    "lagrange_geometry",
    "lie_theta_residual",
    "metric_at",
    "parse",
    "push_direction",
    "run_verification",
    "sample_box",
    "sigma_at",
    "spray_equation_residual",
    "standard_samples",
    "sym_invert",
    "symplectic_defect",
    "theta_at",
    "to_source",
    "two_form_eval",
]
