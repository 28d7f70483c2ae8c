"""Exception types shared across the package."""


class QuasiShuffleError(Exception):
    """Base class for all library-specific errors."""


class OutOfRange(QuasiShuffleError, ValueError):
    """A coordinate or endpoint falls outside the unit interval."""


class DegenerateGap(QuasiShuffleError, ValueError):
    """A gap has zero or negative length."""


class OverlappingGaps(QuasiShuffleError, ValueError):
    """Two gaps have intersecting interiors."""


class InvalidMixture(QuasiShuffleError, ValueError):
    """Mixture weights are not positive rationals summing to one."""


class IncomparableSamples(QuasiShuffleError):
    """Two conjugate-pair samples coincide exactly and carry no atom to break the tie."""


class WindowTooSmall(QuasiShuffleError, ValueError):
    """An empirical-position window does not contain the target label."""


class NotPurelyAtomic(QuasiShuffleError, ValueError):
    """The operation needs a measure whose diffuse part vanishes."""


class InvalidShuffleMap(QuasiShuffleError, ValueError):
    """Pieces do not partition the unit interval or do not preserve Lebesgue measure."""


class InvalidGridMatrix(QuasiShuffleError, ValueError):
    """A grid copula matrix is not square with uniform marginals."""


class CapExceeded(QuasiShuffleError):
    """Exact enumeration was requested beyond the configured size caps."""


class ExactUnavailable(QuasiShuffleError):
    """No exact route exists for the requested object; use Monte Carlo instead."""


class DimensionMismatch(QuasiShuffleError, ValueError):
    """Two distributions or count tables live on different supports."""


class EmptyCounts(QuasiShuffleError, ValueError):
    """A statistical test received no observations."""
