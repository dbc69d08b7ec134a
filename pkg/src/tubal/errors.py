"""Exception types raised by the tubal package."""


class TubalError(Exception):
    """Base class for all errors raised by this package."""


class DimMismatch(TubalError, ValueError):
    pass


class SymmetryViolation(TubalError, ValueError):
    """A spectral tensor that should come from real data is not conjugate-symmetric."""


class RankOutOfRange(TubalError, ValueError):
    pass


class RateOutOfRange(TubalError, ValueError):
    pass


class EmptyMask(TubalError, ValueError):
    pass


class NonFiniteInput(TubalError, ValueError):
    pass


class FreqAboveNyquist(TubalError, ValueError):
    pass


class PlaneOutOfVolume(TubalError, ValueError):
    pass


class ZeroReference(TubalError, ValueError):
    pass


class TooFewPoints(TubalError, ValueError):
    pass


class ReadError(TubalError, OSError):
    """A tensor or mask file is truncated, has a bad magic, or an inconsistent header."""
