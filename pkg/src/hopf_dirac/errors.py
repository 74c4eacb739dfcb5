"""Exception and warning types raised across the package."""


class HopfDiracError(Exception):
    """Base class for all package errors."""


class NumericalError(HopfDiracError):
    """A numerical routine failed to converge or lost accuracy."""


class NoConvergence(NumericalError):
    """Iterative eigenvalue routine exceeded its iteration budget."""


class NotPositiveDefinite(NumericalError):
    """Cholesky factorization of a supposedly positive matrix failed."""


class QuadratureFailure(NumericalError):
    """A radial integral did not converge on the supplied grid."""


class FluxMismatch(HopfDiracError):
    """The flux of a density does not match the requested Chern number."""


class GridTooCoarse(HopfDiracError):
    """Requested discretization is below the supported minimum."""


class AmbiguousZeroMode(NumericalError):
    """An eigenvalue sits in the band between 'zero' and 'nonzero'."""


class HypothesisViolation(HopfDiracError):
    """A closed form was requested outside the regime where it holds."""


class IllConditionedGram(NumericalError):
    """A trial basis is numerically linearly dependent."""


class DegreeTooLarge(HopfDiracError):
    """Polynomial oracle requested above its supported degree."""


class NonConvergentNorm(NumericalError):
    """An L2 norm keeps growing as the integration domain is enlarged."""


class ConfigError(HopfDiracError):
    """Base class for configuration problems (CLI exit code 2)."""


class ParseError(ConfigError):
    """Malformed configuration text."""


class ValidationError(ConfigError):
    """Configuration parsed but holds invalid values."""


class MergeCollision(UserWarning):
    """Two distinct spectral values landed suspiciously close together."""
