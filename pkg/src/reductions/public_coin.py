"""
Reduction from k-fold threshold soundness to single-fold soundness for
public-coin multi-round arguments.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from hilbert import QuantumState, apply_operator
from measure import valest
from memoryless import prepare, repair_prime
from protocols import ProverStrategy, Transcript, as_repeated, measure_registers
from reductions.checkcoins import ResidualMeasurements, checkcoins, sample_embedded_query
from reductions.params import ReductionParams, check_run
from reductions.records import AbortCause, AttemptLog, ReductionRunRecord, RoundLog

logger = logging.getLogger(__name__)


def run_public_coin_reduction(prover: ProverStrategy, protocol, params: ReductionParams, external,
                              copies: Sequence[QuantumState], rng: np.random.Generator,
                              seed: Optional[int] = None) -> ReductionRunRecord:
    """
    Run the public-coin reduction against a single-fold verifier session.

    Args:
        prover: k-fold prover for the threshold-repeated protocol
        protocol: The repeated public-coin protocol ``V^(t,k)``
        params: Reduction parameters (``kind="public-coin"``)
        external: Session offering ``next_query``, ``respond`` and ``verdict``
        copies: At least ``iterations`` copies of the prover state
        rng: Random stream of the reduction
        seed: Recorded in the run record

    Returns:
        The run record; ``transcript`` is ⊥ when the run aborted
    """
    protocol = as_repeated(protocol)
    resolved, fp = check_run(prover, protocol, params, "public-coin", copies)
    eps, delta = resolved.epsilon, resolved.delta
    residuals = ResidualMeasurements(prover, protocol)
    i = int(rng.integers(protocol.k))
    record = ReductionRunRecord("public-coin", i, seed=seed, params=params.to_record())
    logger.info("Public-coin reduction on %s: i=%d, iter=%d, T=%d",
                protocol.name, i, resolved.iterations, fp.T)

    # Step 2: find a copy whose value clears ξ − ε₀.
    first = residuals.family(1, ()).at(eps, delta)
    state = None
    for s in range(1, resolved.iterations + 1):
        outcome = valest(first, copies[s - 1], rng)
        record.step2_attempts = s
        record.p0 = outcome.value
        if outcome.value >= params.filter_threshold():
            state = outcome.post_state
            break
    if state is None:
        logger.info("No copy passed the step-2 filter")
        return record.abort(AbortCause.STEP2_EXHAUSTED, protocol.k)

    prefix = ()
    for ell in range(1, protocol.m + 1):
        m_family = residuals.family(ell, prefix)
        m_ell = m_family.at(eps, delta)
        p_family = residuals.checkcoins_family(ell, prefix, eps, delta)
        q = external.next_query()
        log = RoundLog(ell, external_query=q)
        record.rounds.append(log)
        chosen = None
        for s in range(1, resolved.iterations + 1):
            qbar = sample_embedded_query(protocol, ell, i, q, rng)
            measured = valest(m_ell, state, rng)
            prepared = prepare(m_family, p_family, measured.post_state, fp, rng)
            threshold = params.prepare_threshold(ell, s)
            attempt = AttemptLog(
                s, qbar, measured.value, prepared.value, threshold,
                prepare_rounds=prepared.trace.flooding_rounds,
                oracle_calls=1 + prepared.trace.oracle_calls,
            oracle_limit_ok=prepared.trace.within_oracle_limit,
            )
            log.attempts.append(attempt)
            if prepared.value < threshold:
                logger.info("Round %d attempt %d: Prepare value %.4f below %.4f", ell, s, prepared.value, threshold)
                return record.abort(AbortCause.PREPARE_LOW, protocol.k)
            p, sigma = checkcoins(residuals, ell, prefix, qbar, prepared.state, eps, delta, rng)
            attempt.p_check = p
            attempt.oracle_calls += 1
            if p >= params.success_threshold(ell):
                attempt.success = True
                chosen = (qbar, sigma)
                break
            if s == resolved.iterations:
                return record.abort(AbortCause.CHECKCOINS_EXHAUSTED, protocol.k)
            pi = residuals.checkcoins(ell, prefix, qbar, eps, delta).pvm()
            repaired = repair_prime(m_family, p_family, pi, sigma, p, prepared.value, fp, rng)
            attempt.repair_rounds = repaired.trace.initial_repair_rounds
            attempt.oracle_calls += repaired.trace.oracle_calls
            attempt.oracle_limit_ok = attempt.oracle_limit_ok and repaired.trace.within_oracle_limit
            state = repaired.state

        # Step 3(d): U_ℓ(q̄), measure 𝓩_ℓ, then the discarded value register collapses onto M^{ℓ+1}.
        qbar, sigma = chosen
        u = prover.unitary_matrix(ell, qbar)
        if u is not None:
            sigma = apply_operator(sigma, u)
        zbar, state = measure_registers(sigma, prover.responses[ell - 1], rng)
        prefix = prefix + ((qbar, zbar),)
        if ell < protocol.m:
            after = valest(residuals.family(ell + 1, prefix).at(eps, delta), state, rng)
            state = after.post_state
            log.p_after = after.value
        else:
            log.p_after = float(protocol.accept(prefix))
        log.response = zbar
        external.respond(zbar[i])

    verdicts = protocol.coordinate_accepts(prefix)
    record.transcript = Transcript(prefix, width=protocol.k, verdicts=verdicts)
    record.verdicts = verdicts
    record.external_verdict = external.verdict()
    logger.info("Public-coin reduction completed; embedded verdict %d", record.external_verdict)
    return record
