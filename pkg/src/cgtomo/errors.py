"""Exception types raised by the library."""


class CgTomoError(Exception):
    """Base class for library errors."""


class NonPhysicalError(CgTomoError):
    """A covariance matrix violates the uncertainty principle."""


class NotTmstFormError(CgTomoError):
    """A 4x4 covariance matrix lacks the two-mode squeezed thermal structure."""


class InvalidSigmaError(CgTomoError, ValueError):
    """Coarse-graining width must be strictly positive."""


class UnphysicalReservoirError(CgTomoError, ValueError):
    """Reservoir squeezing exceeds |M|^2 <= N(N+1)."""


class DegenerateDenominatorError(CgTomoError, ZeroDivisionError):
    """Mixing-fraction denominator vanishes."""


class ConfigError(CgTomoError, ValueError):
    """Invalid sweep configuration."""
