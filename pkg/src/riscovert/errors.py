"""Exception types raised by the library."""


class RiscovertError(Exception):
    """Base class for all library errors."""


class GeometryError(RiscovertError):
    """Degenerate geometry: zero distances, coincident elements, empty regions."""


class NumericalIntegrationError(RiscovertError):
    """A quadrature rule cannot resolve the integrand at the requested order."""


class IllConditionedHardwareError(RiscovertError):
    """The multiport impedance system is singular or near-singular."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class SingularityError(RiscovertError):
    """Parameter hit a pole of the phase/reactance bijection."""


class DegenerateWardenError(RiscovertError):
    """The warden's average received power is zero; the ratio objective is unbounded."""


class ConfigError(RiscovertError):
    """Invalid run configuration; carries the offending field name."""

    def __init__(self, field, message):
        super().__init__(f"config field '{field}': {message}")
        self.field = field
