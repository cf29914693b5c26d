"""Exception hierarchy shared by every module."""


class DeconvError(Exception):
    """Base class for all library errors."""


class NonPositiveImaginaryPart(DeconvError):
    pass


class InvalidMeasure(DeconvError):
    pass


class ZeroDenominator(DeconvError):
    pass


class UnsupportedKind(DeconvError):
    pass


class InvalidMomentSequence(DeconvError):
    pass


class SingularLeadingCumulant(DeconvError):
    pass


class UnsupportedWord(DeconvError):
    pass


class DegenerateDimension(DeconvError):
    pass


class NormalizationViolated(DeconvError):
    pass


class DomainEscape(DeconvError):
    pass


class DomainViolation(DeconvError):
    pass


class NotConverged(DeconvError):
    """Raised when a fixed-point iteration stalls.

    The last iterate and its residual are kept on the exception so callers can
    inspect or resume.
    """

    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual


class DegenerateXi(DeconvError):
    pass


class NoStableRegion(DeconvError):
    pass


class SeedNotConverged(NotConverged):
    pass


class ContinuationStall(NotConverged):
    def __init__(self, message, last=None, residual=None, last_good_t=None):
        super().__init__(message, last, residual)
        self.last_good_t = last_good_t


class EtaBelowThreshold(DeconvError):
    pass


class EmptyPart(DeconvError):
    pass


class NyquistViolation(DeconvError):
    pass


class EmptySpectrum(DeconvError):
    pass


class BelowThreshold(DeconvError):
    pass


class MissingMoments(DeconvError):
    pass


class KappaBelowThreshold(DeconvError):
    pass


class MissingSupNorm(DeconvError):
    pass
