"""
Exception hierarchy shared by every package.

All errors derive from ``ValueError`` so callers that only catch the builtin
keep working.
"""


class QprError(ValueError):
    """Base class for simulator errors."""


class LayoutError(QprError):
    """Register layouts are inconsistent (duplicate, unknown or mismatched names)."""


class DimensionError(QprError):
    """An operator does not match the dimension of the registers it targets."""


class StateError(QprError):
    """A state, projector or unitary violates its defining invariants."""


class MeasurementError(QprError):
    """A projective measurement is not complete or not orthogonal."""


class DegenerateStateError(QprError):
    """Every outcome probability (or the state trace) is below the floor."""


class ProtocolError(QprError):
    """A protocol, transcript or prover strategy is malformed."""


class IntractableInstanceError(QprError):
    """An exact computation would exceed the enumeration limits."""


class ParameterError(QprError):
    """Numeric parameters fall outside their admissible range."""


class CatalogError(QprError):
    """A catalog entry name or its parameters cannot be resolved."""


class ConfigError(QprError):
    """An experiment configuration is invalid or cannot be written."""
