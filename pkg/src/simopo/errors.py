"""Exception types shared across the library."""


class SimopoError(Exception):
    """Base class for all library errors."""


class QuadratureConvergenceError(SimopoError):
    """Raised when refining the quadrature grid fails to converge."""


class ThresholdError(SimopoError):
    """Raised for configurations at or above the oscillation threshold."""


class UnstableCavityError(SimopoError):
    """Raised when a computation requires a stable cavity but got detunings
    in the unstable region."""


class BracketError(SimopoError):
    """Raised when a bracketing root search finds no sign change."""


class BasisMismatchError(SimopoError):
    """Raised when two objects defined over different mode bases are combined."""


class DegenerateOpticsError(SimopoError):
    """Raised when an ABCD transform maps the beam onto a degenerate point."""


class ConfigError(SimopoError):
    """Raised for invalid scenario or CLI configuration."""
