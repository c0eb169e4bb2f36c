"""
Deferred-measurement check: CheckCoins followed by the response measurement
against the response measurement followed by ValEst.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Hashable, Optional, Sequence, Tuple

import numpy as np

from config import settings
from hilbert import QuantumState, apply_operator, total_variation
from measure import outcome_distribution, valest, value_grid
from protocols import ProverStrategy, as_repeated, measure_registers, register_distribution
from reductions.checkcoins import Prefix, ResidualMeasurements
from utils.errors import IntractableInstanceError, ProtocolError

logger = logging.getLogger(__name__)

Outcome = Tuple[float, Tuple[int, ...]]


@dataclass
class DeferredMeasurementResult:
    """Joint ``(p, z̄_ℓ)`` laws of both orderings and their distance."""

    check_first: Dict[Outcome, float]
    respond_first: Dict[Outcome, float]
    distance: float
    sampled_distance: Optional[float] = None
    trials: int = 0

    @property
    def passed(self) -> bool:
        return self.distance <= settings.LEMMA_SLACK

    def to_record(self) -> dict:
        def listing(law):
            return [[value, list(z), p] for (value, z), p in sorted(law.items())]

        return {
            "check_first": listing(self.check_first),
            "respond_first": listing(self.respond_first),
            "distance": self.distance,
            "sampled_distance": self.sampled_distance,
            "trials": self.trials,
        }


class _Orderings:
    """Both orderings for one ``(τ_{ℓ−1}, q̄, ℓ)``."""

    def __init__(self, prover: ProverStrategy, protocol, prefix: Prefix, qbar: Sequence[Hashable],
                 ell: int, epsilon: float, delta: float):
        self.prover = prover
        self.protocol = as_repeated(protocol)
        if self.protocol.kind != "public-coin":
            raise ProtocolError("The deferred-measurement check is defined for public-coin protocols")
        if not 1 <= ell <= self.protocol.m:
            raise ProtocolError(f"Round {ell} out of range 1..{self.protocol.m}")
        self.residuals = ResidualMeasurements(prover, self.protocol)
        self.prefix = tuple(prefix)
        self.qbar = tuple(qbar)
        self.ell = ell
        self.epsilon = epsilon
        self.delta = delta
        self.check = self.residuals.checkcoins(ell, self.prefix, self.qbar, epsilon, delta)
        self.u = prover.unitary_matrix(ell, self.qbar)
        self.registers = prover.responses[ell - 1]
        self.grid = value_grid(epsilon)

    def respond(self, state: QuantumState) -> QuantumState:
        return state if self.u is None else apply_operator(state, self.u)

    def continuation(self, zbar: Tuple[int, ...]):
        """Exact value law after ``z̄_ℓ``: ValEst of ``M^{ℓ+1}``, or the final verdict."""
        extended = self.prefix + ((self.qbar, zbar),)
        if self.ell == self.protocol.m:
            value = float(self.grid[-1] if self.protocol.accept(extended) else self.grid[0])
            return None, value
        return self.residuals.family(self.ell + 1, extended).at(self.epsilon, self.delta), None

    def check_first(self, state: QuantumState) -> Dict[Outcome, float]:
        law: Dict[Outcome, float] = defaultdict(float)
        for position, block in enumerate(self.check.blocks):
            p, data = self.check.project(state, position)
            if p < settings.PROBABILITY_FLOOR:
                continue
            post = self.respond(QuantumState.from_unnormalized(state.layout, data))
            for zbar, pz, _ in register_distribution(post, self.registers):
                law[(block.value, zbar)] += p * pz
        return dict(law)

    def respond_first(self, state: QuantumState) -> Dict[Outcome, float]:
        law: Dict[Outcome, float] = defaultdict(float)
        for zbar, pz, post in register_distribution(self.respond(state), self.registers):
            measurement, value = self.continuation(zbar)
            if measurement is None:
                law[(value, zbar)] += pz
                continue
            for v, p in outcome_distribution(measurement, post):
                if p >= settings.PROBABILITY_FLOOR:
                    law[(v, zbar)] += pz * p
        return dict(law)

    def sample_check_first(self, state: QuantumState, rng: np.random.Generator) -> Outcome:
        outcome = valest(self.check, state, rng)
        zbar, _ = measure_registers(self.respond(outcome.post_state), self.registers, rng)
        return outcome.value, zbar

    def sample_respond_first(self, state: QuantumState, rng: np.random.Generator) -> Outcome:
        zbar, post = measure_registers(self.respond(state), self.registers, rng)
        measurement, value = self.continuation(zbar)
        if measurement is None:
            return value, zbar
        return valest(measurement, post, rng).value, zbar


def _frequencies(samples) -> Dict[Outcome, float]:
    counts: Dict[Outcome, float] = defaultdict(float)
    for sample in samples:
        counts[sample] += 1.0
    total = sum(counts.values())
    return {key: c / total for key, c in counts.items()}


def deferred_measurement_check(prover: ProverStrategy, protocol, state: QuantumState, prefix: Prefix,
                               qbar: Sequence[Hashable], ell: int, epsilon: float, delta: float,
                               trials: int = 0,
                               rng: Optional[np.random.Generator] = None) -> DeferredMeasurementResult:
    """
    Compare the two orderings of the value and response measurements.

    The first ordering runs CheckCoins, applies ``U_ℓ(q̄)`` and measures
    ``𝓩_ℓ``; the second applies ``U_ℓ(q̄)``, measures ``𝓩_ℓ`` and then runs
    ValEst of the residual game given ``τ_{ℓ−1}‖(q̄, z̄_ℓ)``.

    Args:
        prover: k-fold prover
        protocol: Repeated public-coin protocol
        state: Prover state before round ``ell``
        prefix: Transcript ``τ_{ℓ−1}``
        qbar: k-fold query of round ``ell``
        ell: Round, 1-based
        epsilon: Grid accuracy
        delta: Failure bound
        trials: Sampled runs of each ordering (0 for the exact comparison only)
        rng: Random stream for the sampled runs

    Returns:
        DeferredMeasurementResult with both joint laws and their total variation
    """
    orderings = _Orderings(prover, protocol, prefix, qbar, ell, epsilon, delta)
    joint_points = len(orderings.check.blocks) * int(np.prod(prover.response_dims(ell)))
    if joint_points > settings.MAX_JOINT_POINTS:
        raise IntractableInstanceError(f"Joint outcome space has {joint_points} points")
    first = orderings.check_first(state)
    second = orderings.respond_first(state)
    result = DeferredMeasurementResult(first, second, total_variation(first, second))
    if trials > 0:
        if rng is None:
            raise ProtocolError("Sampled comparison needs a random stream")
        a = _frequencies(orderings.sample_check_first(state, rng) for _ in range(trials))
        b = _frequencies(orderings.sample_respond_first(state, rng) for _ in range(trials))
        result.sampled_distance = total_variation(a, b)
        result.trials = trials
    logger.debug("Deferred measurement round %d: TV %.3e", ell, result.distance)
    return result
