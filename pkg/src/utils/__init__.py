"""Utils package: error hierarchy and reproducible random streams."""
from .errors import (
    QprError,
    LayoutError,
    DimensionError,
    StateError,
    MeasurementError,
    DegenerateStateError,
    ProtocolError,
    IntractableInstanceError,
    ParameterError,
    CatalogError,
    ConfigError,
)
from .rng import make_rng, trial_seeds

__all__ = [
    "QprError",
    "LayoutError",
    "DimensionError",
    "StateError",
    "MeasurementError",
    "DegenerateStateError",
    "ProtocolError",
    "IntractableInstanceError",
    "ParameterError",
    "CatalogError",
    "ConfigError",
    "make_rng",
    "trial_seeds",
]
