"""
State repair after a disturbing binary measurement.
"""
import logging
from dataclasses import dataclass
from math import ceil
from typing import Hashable

import numpy as np

from config import settings
from hilbert import ProjectiveMeasurement, QuantumState, measure_projective
from measure.valest import ValueMeasurement, valest
from utils.errors import ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RepairResult:
    """Repaired state plus diagnostics."""

    state: QuantumState
    rounds: int
    converged: bool
    oracle_calls: int
    final_value: float


def repair_budget(eta: float) -> int:
    """Maximum number of alternation rounds, ``ceil(c/η)``."""
    if not 0 < eta <= 1:
        raise ParameterError(f"eta must lie in (0, 1], got {eta}")
    return int(ceil(round(settings.REPAIR_BUDGET_CONSTANT / eta, 9)))


def within_tolerance(value: float, target: float, epsilon: float) -> bool:
    """Whether a measured value is within ``2ε`` of the target."""
    return abs(value - target) <= 2 * epsilon + settings.VALUE_MATCH_SLACK


def binary_measurement(pi: ProjectiveMeasurement, y: Hashable) -> ProjectiveMeasurement:
    """``{Π_y, I − Π_y}`` from a measurement and one of its labels."""
    if len(pi) == 2 and set(pi.labels) == {True, False} and y is True:
        return pi
    return pi.binary(y)


def repair_detailed(m: ValueMeasurement, pi: ProjectiveMeasurement, sigma: QuantumState,
                    y: Hashable, p: float, eta: float, rng: np.random.Generator) -> RepairResult:
    """
    Alternate value measurements with ``{Π_y, I − Π_y}`` until the value returns near ``p``.

    Args:
        m: Value measurement used for the checks
        pi: The disturbing measurement
        sigma: State after ``pi`` returned ``y``
        y: Observed label of ``pi``
        p: Value measured before ``pi``
        eta: Repair accuracy; the budget is ``ceil(4/η)`` rounds
        rng: Random stream

    Returns:
        RepairResult; ``converged`` is False when the budget ran out
    """
    budget = repair_budget(eta)
    binary = binary_measurement(pi, y)
    state = sigma
    calls = 0
    rounds = 0
    while True:
        outcome = valest(m, state, rng)
        calls += 1
        state = outcome.post_state
        if within_tolerance(outcome.value, p, m.epsilon):
            return RepairResult(state, rounds, True, calls, outcome.value)
        if rounds >= budget:
            logger.info("Repair budget of %d rounds exhausted (value %.6f, target %.6f)",
                        budget, outcome.value, p)
            return RepairResult(state, rounds, False, calls, outcome.value)
        _, state = measure_projective(state, binary, rng)
        calls += 1
        rounds += 1


def repair(m: ValueMeasurement, pi: ProjectiveMeasurement, sigma: QuantumState, y: Hashable,
           p: float, eta: float, rng: np.random.Generator) -> QuantumState:
    """Repaired state only; see :func:`repair_detailed` for diagnostics."""
    return repair_detailed(m, pi, sigma, y, p, eta, rng).state
