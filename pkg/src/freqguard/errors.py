"""Exception hierarchy shared by every layer of the simulator."""


class FreqguardError(Exception):
    """Base class for all simulator errors."""


class ValidationError(FreqguardError):
    """A value violates a documented invariant (normalization, range, ...)."""


class WiringError(FreqguardError):
    """Amplitude found on a path where an element cannot accept it."""


class RoutingError(FreqguardError):
    """A router (WDM) received a frequency it has no output mapping for."""


class BasisError(FreqguardError):
    """A unitarity-check basis is empty, duplicated, or otherwise unusable."""


class ConfigError(FreqguardError):
    """An experiment configuration is malformed or incomplete."""


class EmptyStateError(ValidationError):
    """An operation that requires amplitude was given an empty state."""
