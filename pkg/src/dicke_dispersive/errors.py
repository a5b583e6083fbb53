"""Exception hierarchy shared by all modules."""


class DickeError(Exception):
    """Base class for errors raised by this package."""


class CutoffTooSmall(DickeError):
    """The Fock cutoff cannot hold the requested dynamics."""

    def __init__(self, message, suggested_n_max=None):
        super().__init__(message)
        self.suggested_n_max = suggested_n_max


class IndexOutOfRange(DickeError, IndexError):
    pass


class NotInteger(DickeError, ValueError):
    pass


class NotHalfInteger(DickeError, ValueError):
    pass


class OffResonance(DickeError, ValueError):
    pass


class NonHermitian(DickeError, ValueError):
    pass


class DimensionMismatch(DickeError, ValueError):
    pass


class StepTooLarge(DickeError):
    """Time-dependent propagation did not converge under step halving."""


class FrameMismatch(DickeError, ValueError):
    pass


class ConfigError(DickeError, ValueError):
    """Unparseable or inconsistent run configuration."""
