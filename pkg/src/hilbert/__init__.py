"""Hilbert-space package."""
from .layout import RegisterLayout
from .state import (
    QuantumState,
    Projector,
    Unitary,
    ProjectiveMeasurement,
    operator_on,
    as_measurement,
)
from .operations import (
    tensor,
    apply_unitary,
    apply_operator,
    project,
    born_probabilities,
    measure_projective,
    partial_trace,
)
from .distance import (
    ClassicalQuantumEnsemble,
    classical_ensemble_state,
    ensemble_from_blocks,
    trace_distance,
    total_variation,
)

__all__ = [
    "RegisterLayout",
    "QuantumState",
    "Projector",
    "Unitary",
    "ProjectiveMeasurement",
    "operator_on",
    "as_measurement",
    "tensor",
    "apply_unitary",
    "apply_operator",
    "project",
    "born_probabilities",
    "measure_projective",
    "partial_trace",
    "ClassicalQuantumEnsemble",
    "classical_ensemble_state",
    "ensemble_from_blocks",
    "trace_distance",
    "total_variation",
]
