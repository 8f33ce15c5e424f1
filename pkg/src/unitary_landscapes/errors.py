"""Exception and warning types shared across the package."""


class LandscapeError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(LandscapeError, ValueError):
    """Matrix or field shapes are incompatible."""


class NotUnitaryError(LandscapeError, ValueError):
    pass


class NotTangentError(LandscapeError, ValueError):
    pass


class KindError(LandscapeError, ValueError):
    """Landscape kind is unknown or inconsistent with the attached weight."""


class SignatureError(LandscapeError, ValueError):
    """A stratum signature violates its bounds or the J_P positivity constraint."""


class SecularBracketError(LandscapeError, RuntimeError):
    pass


class RankDeficientError(LandscapeError, RuntimeError):
    """The discretized control-to-propagator derivative is not of full rank."""

    def __init__(self, rank: int, required: int, message: str | None = None):
        self.rank = rank
        self.required = required
        super().__init__(message or f"numerical rank {rank} < {required}")


class NotCriticalError(LandscapeError, RuntimeError):
    pass


class ConfigError(LandscapeError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class CutLocusWarning(RuntimeWarning):
    """A unitary has an eigenvalue at (or numerically near) -1."""
