"""Exception types shared across the package."""


class SimomacError(Exception):
    """Base class for all package-specific errors."""


class DegenerateInput(SimomacError):
    """An input is structurally unusable (e.g. zero vector where a direction is needed)."""


class NumericalDomain(SimomacError):
    """A matrix argument violates the numerical domain (non-Hermitian, singular, ...)."""


class InvalidParam(SimomacError):
    """A scalar or shape parameter is out of range."""


class SingularPoint(SimomacError):
    """Density evaluation requested at a singular point."""


class InvalidRegime(SimomacError):
    """Parameter fitting attempted outside its valid regime (e.g. mean power <= 1)."""


class RegimeUnsupported(SimomacError):
    """An operation was called with an unsupported (T, N) regime."""


class LowSnrRegime(SimomacError):
    """SNR too low for the auxiliary-distribution fit to be well defined."""


class RegimeWarning(UserWarning):
    """The requested objective/regime pairing is valid but known to be non-tight."""
