"""Value estimation and state repair."""
from .game import GameSpec, success_operator, play_once, decode_response, coin_strings
from .valest import (
    MeasurementOutcome,
    ValueBlock,
    ValueMeasurement,
    ValueMeasurementFamily,
    decompose,
    grid_size,
    value_grid,
    valest,
    valest_exact,
    outcome_distribution,
)
from .repair import (
    RepairResult,
    repair,
    repair_detailed,
    repair_budget,
    within_tolerance,
    binary_measurement,
)

__all__ = [
    "GameSpec",
    "success_operator",
    "play_once",
    "decode_response",
    "coin_strings",
    "MeasurementOutcome",
    "ValueBlock",
    "ValueMeasurement",
    "ValueMeasurementFamily",
    "decompose",
    "grid_size",
    "value_grid",
    "valest",
    "valest_exact",
    "outcome_distribution",
    "RepairResult",
    "repair",
    "repair_detailed",
    "repair_budget",
    "within_tolerance",
    "binary_measurement",
]
