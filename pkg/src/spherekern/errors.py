"""Exception hierarchy.

Two branches matter for the CLI exit-code mapping: ``ConfigurationError``
subclasses signal bad inputs or parameters (exit code 2), while
``NumericalError`` subclasses signal a computation that could not be
completed reliably (exit code 3).
"""


class SphereKernError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(SphereKernError):
    """Invalid parameter, option, or input configuration."""


class DomainError(ConfigurationError):
    """Numeric input outside the supported domain (e.g. |u| > 1 + 1e-12)."""


class UnsupportedSmoothnessError(ConfigurationError):
    """Smoothness s outside the closed-form set {0, 1, 2, 3}."""


class UnsupportedDimensionError(ConfigurationError):
    """Dimension outside the supported range for the requested operation."""


class ParameterError(ConfigurationError):
    """Parameter outside its valid range (e.g. delta not in (0, 1))."""


class NumericalError(SphereKernError):
    """A numerical procedure failed to reach its accuracy contract."""


class IllConditionedGramError(NumericalError):
    """Cholesky factorization failed even after the jitter escalation."""


class SpectralAccuracyError(NumericalError):
    """A computed spectrum violates its reconstruction/mass tolerance."""


class FitError(NumericalError):
    """Too few usable data points for a requested regression/fit."""


class DegenerateFunctionError(NumericalError):
    """A synthetic ground-truth function degenerated (e.g. zero range)."""


class ExperimentError(NumericalError):
    """Too many repetitions of an experiment failed to produce results."""
