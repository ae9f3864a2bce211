"""Conditional extremes of polar random vectors X = R u(T), Y = R v(T).

Given a light-tailed radial variable R and shape functions peaking at an
angular center t0, the package computes the normalizing sequences of the
conditional law given {X > x}, provides the limit distributions with
exact samplers, simulates the true conditional law by rare-event Monte
Carlo, and measures the distance between the two.
"""

__version__ = "0.1.0"

from .asymptotics import (
    LimitEstimate,
    Normalizers,
    PhiRoot,
    compute_normalizers,
    compute_phi,
    mixture_limits,
    mixture_p,
    ratio_q,
    tail_asymptotic,
)
from .errors import (
    BracketError,
    BudgetExceeded,
    CaseMismatch,
    ConfigError,
    MonotonicityError,
    NonConvergence,
    ParameterError,
    PolarTailError,
    UnknownFamilyError,
)
from .limitlaw import (
    CorollaryCase,
    CorollaryKind,
    LimitLawOneSided,
    LimitLawTwoSided,
    Scaling,
    SignLaw,
    density_one_sided,
    density_two_sided,
    normalization_support,
    pushforward_corollary,
    sample_one_sided,
    sample_two_sided,
    sign_probability,
)
from .model import (
    AngularLaw,
    CheckEntry,
    Condition,
    PolarModel,
    RadialLaw,
    ShapeU,
    ShapeV,
    Sidedness,
    ValidationGrid,
    ValidationReport,
    build_builtin_model,
    load_config,
    parse_config_text,
    validate_model,
)
from .montecarlo import (
    AcceptanceStats,
    ConditionalSample,
    bivariate_normalized,
    empirical_sign_freq,
    estimate_tail_probability,
    sample_conditional,
)
from .oracle import (
    PlanarSupport,
    QuadratureResult,
    adaptive_quadrature,
    density_normalization,
    gamma_eval,
    scaled_tail_quadrature,
    small_t_mass_check,
    tail_probability_quadrature,
)
from .stats import (
    ConvergenceReport,
    ReportRow,
    cell_masses,
    chi_square_2d,
    convergence_report,
    ks_one_sample,
    ks_two_sample,
)

__all__ = [
    "__version__",
    "AcceptanceStats",
    "AngularLaw",
    "BracketError",
    "BudgetExceeded",
    "CaseMismatch",
    "CheckEntry",
    "Condition",
    "ConditionalSample",
    "ConfigError",
    "ConvergenceReport",
    "CorollaryCase",
    "CorollaryKind",
    "LimitEstimate",
    "LimitLawOneSided",
    "LimitLawTwoSided",
    "MonotonicityError",
    "NonConvergence",
    "Normalizers",
    "ParameterError",
    "PhiRoot",
    "PlanarSupport",
    "PolarModel",
    "PolarTailError",
    "QuadratureResult",
    "RadialLaw",
    "ReportRow",
    "Scaling",
    "ShapeU",
    "ShapeV",
    "Sidedness",
    "SignLaw",
    "UnknownFamilyError",
    "ValidationGrid",
    "ValidationReport",
    "adaptive_quadrature",
    "bivariate_normalized",
    "build_builtin_model",
    "cell_masses",
    "chi_square_2d",
    "compute_normalizers",
    "compute_phi",
    "convergence_report",
    "density_normalization",
    "density_one_sided",
    "density_two_sided",
    "empirical_sign_freq",
    "estimate_tail_probability",
    "gamma_eval",
    "ks_one_sample",
    "ks_two_sample",
    "load_config",
    "mixture_limits",
    "mixture_p",
    "normalization_support",
    "parse_config_text",
    "pushforward_corollary",
    "ratio_q",
    "sample_conditional",
    "sample_one_sided",
    "sample_two_sided",
    "scaled_tail_quadrature",
    "sign_probability",
    "small_t_mass_check",
    "tail_asymptotic",
    "tail_probability_quadrature",
    "validate_model",
]
