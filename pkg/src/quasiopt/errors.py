"""Exception hierarchy for quasiopt."""


class QuasiOptError(ValueError):
    """Base class for all domain errors raised by this package."""


class LengthMismatch(QuasiOptError):
    pass


class NonPositiveSingularValue(QuasiOptError):
    pass


class NonPositiveArgument(QuasiOptError):
    pass


class NonPositiveAlpha(NonPositiveArgument):
    pass


class EmptyGrid(QuasiOptError):
    pass


class GridTooSmall(QuasiOptError):
    pass


class BracketDoesNotStraddle(QuasiOptError):
    pass


class LogDomainError(QuasiOptError):
    """A logarithmic index function was evaluated outside (0, 1/e]."""


class ZeroNormApproximant(QuasiOptError):
    pass


class EmptySubset(QuasiOptError):
    pass


class ZeroMatrix(QuasiOptError):
    pass


class BadDecay(QuasiOptError):
    pass


class BadEpsilon(QuasiOptError):
    pass


class NMaxTooLarge(QuasiOptError):
    pass


class OutOfRange(QuasiOptError):
    pass


class InsufficientSweep(QuasiOptError):
    pass


class ConfigError(QuasiOptError):
    pass


class ParseError(QuasiOptError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BadRunIndex(QuasiOptError):
    pass


class NonMonotoneSpectrum(UserWarning):
    """Ingested singular values were not sorted; they have been reordered."""
