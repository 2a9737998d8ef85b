"""Exception and warning types shared across the package."""


class RabiError(Exception):
    """Base class for solver errors."""


class InvalidParameters(RabiError, ValueError):
    pass


class CouplingOutOfRange(InvalidParameters):
    """Two-photon coupling at or beyond the spectral-collapse point g = 1/2."""


class ZeroCoupling(RabiError, ValueError):
    """A recurrence that divides by g was asked to run at g = 0."""


class PoleTooClose(RabiError, ArithmeticError):
    """A recurrence denominator came within the pole guard of zero."""


class NotConverged(RabiError):
    """A truncated series failed its tail criterion."""


class WindowEmpty(RabiError, ValueError):
    pass


class CutoffTooSmall(RabiError, ValueError):
    """Fock cutoff too small for the requested state or matrix."""


class NoConvergence(RabiError, ArithmeticError):
    """Jacobi sweeps exhausted before the off-diagonal norm vanished."""


class DegenerateState(RabiError, ValueError):
    """Frame proportionality is meaningless at an exceptional (degenerate) level."""


class NotConvergedWarning(RuntimeWarning):
    pass


class SuspectZeroWarning(RuntimeWarning):
    """A near-tangent minimum of |G| that was not promoted to a root."""
