"""spherekern: neural-kernel spectra and regression on the sphere."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DegenerateFunctionError,
    DomainError,
    ExperimentError,
    FitError,
    IllConditionedGramError,
    NumericalError,
    ParameterError,
    SphereKernError,
    SpectralAccuracyError,
    UnsupportedDimensionError,
    UnsupportedSmoothnessError,
)
from .experiments import (
    ErrorRateReport,
    MigGrowthReport,
    SyntheticFunction,
    error_rate_experiment,
    fit_loglog_slope,
    make_synthetic,
    mig_growth_experiment,
    theoretical_error_exponent,
    theoretical_mig_exponent,
)
from .kernels import (
    DotProductKernel,
    KernelSpec,
    McOracleConfig,
    gram,
    make_kernel,
    mc_estimate,
    nt_deep,
    nt_two_layer,
    rf_closed,
    rf_deep,
    rf_derivative,
)
from .regression import (
    ConfidenceParams,
    FittedRegressor,
    GreedyTrace,
    InfoGainReport,
    SphericalDataset,
    confidence_band,
    effective_dimension,
    fit,
    greedy_max_variance,
    information_gain,
    predict_mean,
    predict_variance,
    sample_sphere,
    variance_sum_check,
)
from .spectral import (
    GegenbauerBasis,
    MaternSpec,
    SpectrumTable,
    addition_constant,
    default_fit_range,
    eigendecay_fit,
    endpoint_coefficient,
    flatten_spectrum,
    gegenbauer,
    gegenbauer_at_one,
    matern_spectrum,
    mercer_spectrum,
    multiplicity,
    reconstruct,
    rkhs_equivalence_ratio,
    tail_sum,
    verify_endpoint,
)

__all__ = [
    "__version__",
    "ConfigurationError",
    "DegenerateFunctionError",
    "DomainError",
    "DotProductKernel",
    "ExperimentError",
    "FitError",
    "IllConditionedGramError",
    "KernelSpec",
    "McOracleConfig",
    "NumericalError",
    "ParameterError",
    "SphereKernError",
    "SpectralAccuracyError",
    "UnsupportedDimensionError",
    "UnsupportedSmoothnessError",
    "ConfidenceParams",
    "ErrorRateReport",
    "FittedRegressor",
    "GegenbauerBasis",
    "GreedyTrace",
    "InfoGainReport",
    "MaternSpec",
    "MigGrowthReport",
    "SpectrumTable",
    "SphericalDataset",
    "SyntheticFunction",
    "addition_constant",
    "confidence_band",
    "default_fit_range",
    "effective_dimension",
    "eigendecay_fit",
    "endpoint_coefficient",
    "error_rate_experiment",
    "fit",
    "fit_loglog_slope",
    "flatten_spectrum",
    "gegenbauer",
    "gegenbauer_at_one",
    "gram",
    "greedy_max_variance",
    "information_gain",
    "make_kernel",
    "make_synthetic",
    "matern_spectrum",
    "mc_estimate",
    "mercer_spectrum",
    "mig_growth_experiment",
    "multiplicity",
    "nt_deep",
    "nt_two_layer",
    "predict_mean",
    "predict_variance",
    "reconstruct",
    "rf_closed",
    "rf_deep",
    "rf_derivative",
    "rkhs_equivalence_ratio",
    "sample_sphere",
    "tail_sum",
    "theoretical_error_exponent",
    "theoretical_mig_exponent",
    "variance_sum_check",
    "verify_endpoint",
]
