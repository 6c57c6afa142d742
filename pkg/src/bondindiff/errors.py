"""Exception hierarchy shared across the library.

Three branches matter to callers: configuration problems (bad files or
option values), validation problems (inputs violate a documented
precondition), and numeric problems (a computation could not be carried
out to tolerance).  The CLI maps each branch to a distinct exit code.
"""


class BondIndiffError(Exception):
    """Base class for all library errors."""


class ConfigError(BondIndiffError):
    """Configuration file or option could not be parsed."""


class ValidationError(BondIndiffError):
    """An input violates a documented precondition."""


class NumericError(BondIndiffError):
    """A numeric routine failed to produce a trustworthy result."""


class PoleError(NumericError):
    """Gamma function evaluated too close to one of its poles."""


class ContourError(ValidationError):
    """Integration contour placed on the wrong side of the real axis."""


class TruncationError(NumericError):
    """Integrand not negligible at the truncation boundary."""


class TailError(NumericError):
    """Outer integral tail contribution exceeds the requested tolerance."""


class BracketError(NumericError):
    """Root finder could not bracket a sign change (or found several)."""


class BlowUpError(NumericError):
    """ODE solution exceeded the overflow guard."""


class UnidentifiableError(ValidationError):
    """Requested quantity is not identified by the model (e.g. lambda with zero vol)."""
