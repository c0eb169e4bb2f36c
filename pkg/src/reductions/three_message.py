"""
Reduction from k-fold threshold soundness to single-fold soundness for
three-message private-coin arguments, using soft decisions.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from hilbert import QuantumState, apply_operator
from measure import ValueMeasurementFamily, valest
from memoryless import prepare, repair_prime
from protocols import ProverStrategy, Transcript, as_repeated, measure_registers, three_message_game
from reductions.params import ReductionParams, check_run
from reductions.records import AbortCause, AttemptLog, ReductionRunRecord, RoundLog
from reductions.softdecision import (
    DECISIONS,
    SoftDecisionProjections,
    complete_randomness,
    sample_omega,
    softdecision_proj,
)
from utils.errors import ParameterError

logger = logging.getLogger(__name__)


def run_three_message_reduction(prover: ProverStrategy, protocol, params: ReductionParams, external,
                                copies: Sequence[QuantumState], rng: np.random.Generator,
                                seed: Optional[int] = None, decision: str = "soft") -> ReductionRunRecord:
    """
    Run the three-message reduction against a single-fold verifier session.

    Args:
        prover: k-fold prover with first-message registers
        protocol: The repeated three-message protocol
        params: Reduction parameters (``kind="three-message"``)
        external: Session offering ``receive_first``, ``respond`` and ``verdict``
        copies: At least ``iterations`` copies of the prover state
        rng: Random stream of the reduction
        seed: Recorded in the run record
        decision: ``"soft"`` or the all-siblings ``"hard"`` variant

    Returns:
        The run record; ``transcript`` is ⊥ when the run aborted
    """
    if decision not in DECISIONS:
        raise ParameterError(f"decision must be one of {DECISIONS}, got {decision!r}")
    protocol = as_repeated(protocol)
    resolved, fp = check_run(prover, protocol, params, "three-message", copies)
    eps, delta = resolved.epsilon, resolved.delta
    base = protocol.base
    k = protocol.k
    i = int(rng.integers(k))
    record = ReductionRunRecord("three-message", i, seed=seed, decision=decision, params=params.to_record())
    logger.info("Three-message reduction on %s (%s): i=%d, iter=%d, T=%d",
                protocol.name, decision, i, resolved.iterations, fp.T)

    # Step 2: measure 𝓩₁ on each copy and keep the first whose residual value clears ξ − ε₀.
    state = None
    for s in range(1, resolved.iterations + 1):
        z1bar, post = measure_registers(copies[s - 1], prover.first_message, rng)
        m_family = ValueMeasurementFamily.from_game(three_message_game(prover, protocol, z1bar))
        outcome = valest(m_family.at(eps, delta), post, rng)
        record.step2_attempts = s
        record.p0 = outcome.value
        if outcome.value >= params.filter_threshold():
            state = outcome.post_state
            break
    if state is None:
        logger.info("No copy passed the step-2 filter")
        return record.abort(AbortCause.STEP2_EXHAUSTED, k)

    q = external.receive_first(z1bar[i])
    m_value = m_family.at(eps, delta)
    projections = SoftDecisionProjections(prover, protocol, z1bar, resolved.nu, protocol.t, decision)
    p_family = projections.family()
    log = RoundLog(1, external_query=q)
    record.rounds.append(log)

    space = base.randomness_space
    chosen = None
    for s in range(1, resolved.iterations + 1):
        r_minus_i = tuple(space[int(rng.integers(len(space)))] for _ in range(k - 1))
        omega = sample_omega(rng)
        measured = valest(m_value, state, rng)
        prepared = prepare(m_family, p_family, measured.post_state, fp, rng)
        threshold = params.prepare_threshold(1, s)
        attempt = AttemptLog(
            s, projections.query(i, r_minus_i, q), measured.value, prepared.value, threshold,
            prepare_rounds=prepared.trace.flooding_rounds,
            oracle_calls=1 + prepared.trace.oracle_calls,
            oracle_limit_ok=prepared.trace.within_oracle_limit,
            decision_index=i, randomness=r_minus_i, omega=omega,
        )
        log.attempts.append(attempt)
        if prepared.value < threshold:
            logger.info("Attempt %d: Prepare value %.4f below %.4f", s, prepared.value, threshold)
            return record.abort(AbortCause.PREPARE_LOW, k)
        sigma, b = softdecision_proj(projections, i, r_minus_i, q, omega, prepared.state, rng)
        attempt.p_check = float(b)
        if b == 1:
            attempt.success = True
            chosen = (r_minus_i, sigma)
            break
        if s == resolved.iterations:
            return record.abort(AbortCause.SOFTDECISION_EXHAUSTED, k)
        pi = projections.measurement(i, r_minus_i, q, omega)
        repaired = repair_prime(m_family, p_family, pi, sigma, 0, prepared.value, fp, rng)
        attempt.repair_rounds = repaired.trace.initial_repair_rounds
        attempt.oracle_calls += repaired.trace.oracle_calls
        attempt.oracle_limit_ok = attempt.oracle_limit_ok and repaired.trace.within_oracle_limit
        state = repaired.state

    # Step 6: answer the assembled query q̄ and forward coordinate i.
    r_minus_i, sigma = chosen
    qbar = projections.query(i, r_minus_i, q)
    u = prover.unitary_matrix(1, qbar)
    if u is not None:
        sigma = apply_operator(sigma, u)
    z2bar, _ = measure_registers(sigma, prover.responses[0], rng)
    log.response = z2bar
    external.respond(z2bar[i])
    record.external_verdict = external.verdict()

    rbar = complete_randomness(r_minus_i, i)
    verdicts = tuple(
        record.external_verdict if c == i else base.accept(rbar[c], (z1bar[c], qbar[c], z2bar[c]))
        for c in range(k)
    )
    record.transcript = Transcript(
        ((qbar, z2bar),), width=k, verdicts=verdicts, first_message=z1bar, randomness=rbar,
    )
    record.verdicts = verdicts
    logger.info("Three-message reduction completed; embedded verdict %d", record.external_verdict)
    return record
