"""Numerical toolkit for thermal states of non-interacting Bose gases.

Single-particle spectral data (harmonic trap / free Laplacian), Gaussian
field states evaluated on products of field resolvents, thermodynamic and
maximal-chemical-potential limits, condensation diagnostics, and a
brute-force truncated-Fock validation layer.  All evaluators are pure
functions of immutable inputs and deterministic, so results are
reproducible bit for bit and safe to compute concurrently.
"""

from .single_particle import (
    TestFunction,
    HarmonicTrap,
    FreeLaplacian,
    DomainStatus,
    DomainVerdict,
    LimitKind,
    basis_function,
    gaussian,
    inner_product,
    gauge_rotate,
    partition_function,
    partition_function_spectral,
    project_out_ground,
    domain_classify,
    expand_in_model_basis,
)
from .quasifree import (
    Averaging,
    CoherentShift,
    QuasifreeSpec,
    ResolventWord,
    SesquiForm,
    resolvent_word_expectation,
    regularity_filter,
    two_point,
    weyl_expectation,
)
from .equilibrium import (
    ANNIHILATED,
    ConvergenceReport,
    ThermalParams,
    Verdict,
    clustering_check,
    kms_check,
    limit_form,
    thermal_form,
    thermal_two_point,
    thermodynamic_limit_scan,
    vacuum_form,
    limit_form_spec,
)
from .condensate import (
    DIVERGENT,
    DensityProfile,
    LocalNormalityReport,
    NormalityVerdict,
    Region,
    bessel_factor,
    central_decomposition_check,
    critical_density_trap,
    critical_density_trap_spectral,
    free_critical_density,
    free_critical_density_series,
    local_normality_report,
    mehler_kernel,
    mehler_kernel_spectral,
    number_expectation,
    trap_number_bound,
)
from .fock_oracle import (
    ModeVector,
    TruncatedFock,
    field_matrix,
    gauge_average_matrix,
    gibbs_expectation,
    regularized_number_expectation,
    resolvent_matrix,
    weyl_conjugated_resolvent,
    weyl_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "TestFunction", "HarmonicTrap", "FreeLaplacian", "DomainStatus",
    "DomainVerdict", "LimitKind", "basis_function", "gaussian",
    "inner_product", "gauge_rotate", "partition_function",
    "partition_function_spectral", "project_out_ground",
    "domain_classify", "expand_in_model_basis",
    "Averaging", "CoherentShift", "QuasifreeSpec", "ResolventWord",
    "SesquiForm", "resolvent_word_expectation", "regularity_filter",
    "two_point", "weyl_expectation",
    "ANNIHILATED", "ConvergenceReport", "ThermalParams", "Verdict",
    "clustering_check", "kms_check", "limit_form", "thermal_form",
    "thermal_two_point", "thermodynamic_limit_scan", "vacuum_form",
    "limit_form_spec",
    "DIVERGENT", "DensityProfile", "LocalNormalityReport",
    "NormalityVerdict", "Region", "bessel_factor",
    "central_decomposition_check", "critical_density_trap",
    "critical_density_trap_spectral", "free_critical_density",
    "free_critical_density_series", "local_normality_report",
    "mehler_kernel", "mehler_kernel_spectral", "number_expectation",
    "trap_number_bound",
    "ModeVector", "TruncatedFock", "field_matrix", "gauge_average_matrix",
    "gibbs_expectation", "regularized_number_expectation",
    "resolvent_matrix", "weyl_conjugated_resolvent", "weyl_matrix",
    "__version__",
]
