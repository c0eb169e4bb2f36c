"""
Prepare and Repair′: repair interleaved with rounds of random dummy measurements.
"""
import logging
from dataclasses import dataclass, field
from typing import Hashable, List, Optional

import numpy as np

from hilbert import ProjectiveMeasurement, QuantumState, measure_projective
from measure import ValueMeasurement, ValueMeasurementFamily, repair_detailed, valest
from memoryless.family import ProjectionFamily
from memoryless.params import FloodingParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FloodingRound:
    """One flooding round: ``M′`` value, sampled member, its outcome, then repair."""

    index: int
    member: Hashable
    value: float
    outcome: Hashable
    repair_rounds: int
    repair_converged: bool

    def to_record(self) -> dict:
        return {
            "index": self.index,
            "member": repr(self.member),
            "value": self.value,
            "outcome": repr(self.outcome),
            "repair_rounds": self.repair_rounds,
            "repair_converged": self.repair_converged,
        }


@dataclass
class FloodingTrace:
    """Log of one Prepare or Repair′ invocation."""

    procedure: str
    T: int
    t: Optional[int] = None
    rounds: List[FloodingRound] = field(default_factory=list)
    initial_repair_rounds: Optional[int] = None
    initial_repair_converged: Optional[bool] = None
    final_value: Optional[float] = None
    oracle_calls: int = 0
    oracle_limit: Optional[float] = None

    @property
    def flooding_rounds(self) -> int:
        return len(self.rounds)

    @property
    def within_oracle_limit(self) -> bool:
        return self.oracle_limit is None or self.oracle_calls <= self.oracle_limit

    def to_record(self) -> dict:
        return {
            "procedure": self.procedure,
            "T": self.T,
            "t": self.t,
            "rounds": [r.to_record() for r in self.rounds],
            "initial_repair_rounds": self.initial_repair_rounds,
            "initial_repair_converged": self.initial_repair_converged,
            "final_value": self.final_value,
            "oracle_calls": self.oracle_calls,
            "oracle_limit": self.oracle_limit,
            "within_oracle_limit": self.within_oracle_limit,
        }


@dataclass(frozen=True)
class FloodingResult:
    """Output state, last ``M′`` value and the trace log."""

    state: QuantumState
    value: float
    trace: FloodingTrace


def _flooding_round(index: int, m_prime: ValueMeasurement, p_family: ProjectionFamily,
                    state: QuantumState, fp: FloodingParams, rng: np.random.Generator,
                    trace: FloodingTrace) -> QuantumState:
    outcome = valest(m_prime, state, rng)
    key, member = p_family.sample(rng)
    y, disturbed = measure_projective(outcome.post_state, member, rng)
    repaired = repair_detailed(m_prime, member, disturbed, y, outcome.value, fp.inner_eta, rng)
    trace.oracle_calls += 2 + repaired.oracle_calls
    trace.rounds.append(FloodingRound(index, key, outcome.value, y, repaired.rounds, repaired.converged))
    return repaired.state


def _finish(trace: FloodingTrace, final_value: float, fp: FloodingParams) -> None:
    """Record the last value and check the call count against ``c·(T + T²/η)``."""
    trace.final_value = final_value
    trace.oracle_limit = fp.oracle_call_limit()
    if not trace.within_oracle_limit:
        logger.warning("%s made %d oracle calls, over the limit of %.0f",
                       trace.procedure, trace.oracle_calls, trace.oracle_limit)


def prepare(m_family: ValueMeasurementFamily, p_family: ProjectionFamily, state: QuantumState,
            fp: FloodingParams, rng: np.random.Generator, t: Optional[int] = None) -> FloodingResult:
    """
    Flood a state before a disturbing measurement.

    Samples ``t ← [T]``, runs ``t − 1`` flooding rounds and returns one final
    ``M′`` measurement, where ``M′ = M_{ε/2T, δ²/64T²}``.

    Args:
        m_family: Value measurement family
        p_family: Family the dummy measurements are drawn from
        state: Input state ``ρ*``
        fp: Flooding parameters
        rng: Random stream
        t: Forced round index (sampled uniformly when omitted)

    Returns:
        FloodingResult with ``(ρ′, p′)`` and the trace
    """
    m_prime = m_family.at(fp.inner_epsilon, fp.inner_delta)
    if t is None:
        t = int(rng.integers(1, fp.T + 1))
    trace = FloodingTrace("prepare", fp.T, t=t)
    current = state
    for index in range(1, t):
        current = _flooding_round(index, m_prime, p_family, current, fp, rng, trace)
    final = valest(m_prime, current, rng)
    trace.oracle_calls += 1
    _finish(trace, final.value, fp)
    logger.debug("Prepare ran %d flooding rounds, p′ = %.6f", t - 1, final.value)
    return FloodingResult(final.post_state, final.value, trace)


def repair_prime(m_family: ValueMeasurementFamily, p_family: ProjectionFamily,
                 pi: ProjectiveMeasurement, sigma: QuantumState, y: Hashable, p_prime: float,
                 fp: FloodingParams, rng: np.random.Generator) -> FloodingResult:
    """
    Repair after ``pi`` returned ``y``, then flood for exactly ``T`` rounds.

    Args:
        m_family: Value measurement family
        p_family: Family the dummy measurements are drawn from
        pi: The disturbing measurement
        sigma: State after ``pi``
        y: Outcome of ``pi``
        p_prime: Value returned by :func:`prepare`
        fp: Flooding parameters
        rng: Random stream

    Returns:
        FloodingResult whose state is ``σ*``
    """
    m_prime = m_family.at(fp.inner_epsilon, fp.inner_delta)
    trace = FloodingTrace("repair_prime", fp.T, t=fp.T)
    first = repair_detailed(m_prime, pi, sigma, y, p_prime, fp.inner_eta, rng)
    trace.oracle_calls += first.oracle_calls
    trace.initial_repair_rounds = first.rounds
    trace.initial_repair_converged = first.converged
    current = first.state
    for index in range(1, fp.T + 1):
        current = _flooding_round(index, m_prime, p_family, current, fp, rng, trace)
    final = valest(m_prime, current, rng)
    trace.oracle_calls += 1
    _finish(trace, final.value, fp)
    return FloodingResult(final.post_state, final.value, trace)
