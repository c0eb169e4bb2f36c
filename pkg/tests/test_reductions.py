import logging
from math import ceil, cos, log2, pi, sqrt

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

from conftest import random_pure
from hilbert import QuantumState, RegisterLayout, born_probabilities
from measure import grid_size, outcome_distribution
from protocols import (
    ProverStrategy,
    PublicCoinProtocol,
    always_accept,
    bad_correlations_prover,
    exact_success,
    haar_prover,
    parity,
    passive_prover,
    perfect_prover,
    preimage,
    product_prover,
    programmable,
    repeat,
    response_register,
    rotation_prover,
    subset,
)
from reductions import (
    OMEGA_SPACE,
    AbortCause,
    PublicCoinVerifier,
    ReductionParams,
    ResidualMeasurements,
    ScriptedVerifier,
    SoftDecisionProjections,
    ThreeMessageVerifier,
    acceptance_probability,
    check_run,
    checkcoins,
    deferred_measurement_check,
    open_session,
    run_public_coin_reduction,
    run_three_message_reduction,
    sample_embedded_query,
    sample_omega,
    softdecision,
    softdecision_proj,
)
from utils.errors import IntractableInstanceError, ParameterError, ProtocolError
from utils.rng import make_rng

DESK = dict(mode="desk", iterations=2, epsilon0=0.5, epsilon=0.25, delta=0.25, eta=0.5, flooding_T=2)


def two_round_parity():
    """Two rounds; accept iff each response bit equals its query bit."""
    return PublicCoinProtocol(
        name="parity-2-round",
        query_spaces=((0, 1), (0, 1)),
        response_dims=(2, 2),
        accept_fn=lambda entries: int(all(z == q for q, z in entries)),
    )


def normalized_branch(state, measurement, label):
    proj = measurement.projector(label).matrix
    branch = proj @ state.density() @ proj
    return branch / np.trace(branch).real


def level_transcript(k, j, accepting_siblings):
    """Programmable-game transcript with ``r = q`` and the given number of accepting siblings."""
    siblings = [c for c in range(k) if c != j]
    z2 = tuple(int(c in siblings[:accepting_siblings]) for c in range(k))
    q = tuple(range(k))
    r_minus_j = tuple(c for c in range(k) if c != j)
    return r_minus_j, ((0,) * k, q, z2)


# parameters

def test_derived_public_coin_parameters():
    params = ReductionParams(kind="public-coin", mode="paper", xi=0.5, lam=1, k=2, t=2, m=1)
    r = params.resolved()
    assert r.iterations == 2
    assert r.epsilon0 == pytest.approx(0.5)
    assert r.epsilon == pytest.approx(0.5 / 32)
    assert r.delta == pytest.approx(0.25)
    assert r.n_grid == grid_size(0.5 / 32) == 65
    assert r.eta == pytest.approx(1 / (2 * 2 * 1 * 2) / 65)
    assert r.nu is None
    assert r.conformant


def test_derived_three_message_parameters():
    params = ReductionParams(kind="three-message", mode="paper", xi=0.5, lam=1, k=2, t=2)
    r = params.resolved()
    assert params.m == 2
    assert r.iterations == 8
    assert r.epsilon0 == pytest.approx(0.125)
    assert r.epsilon == pytest.approx(0.125 / 128)
    assert r.nu == pytest.approx(sqrt(0.5))
    assert r.eta == pytest.approx(1 / (4 * 2 * 8) / grid_size(0.125 / 128))


def test_desk_mode_is_non_conformant_with_default_nu():
    params = ReductionParams(kind="three-message", xi=0.25, k=4, t=3, **DESK)
    r = params.resolved()
    assert not r.conformant
    assert r.nu == pytest.approx(sqrt(-log2(0.25) / 4))
    assert params.flooding(3).T == 2


@pytest.mark.parametrize("data", [
    {"kind": "public-coin", "mode": "desk", "xi": 0.5, "k": 2, "t": 2},
    {"kind": "public-coin", "mode": "paper", "xi": 0.5, "k": 2, "t": 3},
    {"kind": "public-coin", "mode": "paper", "xi": 1.5, "k": 2, "t": 2},
    {"kind": "public-coin", "mode": "paper", "xi": 0.5, "k": 2, "t": 2, "colour": "red"},
    {"kind": "three-message", "mode": "paper", "xi": 0.5, "k": 2, "t": 2, "m": 3},
])
def test_invalid_parameters(data):
    with pytest.raises(ValidationError):
        ReductionParams(**data)


def test_thresholds_follow_formulas():
    params = ReductionParams(kind="public-coin", xi=0.9, k=3, t=3, m=2, **DESK)
    assert params.prepare_threshold(2, 3) == pytest.approx(0.9 - 2 * 0.5 - 13 * 0.25)
    assert params.success_threshold(1) == pytest.approx(0.9 - 2 * 0.5)
    assert params.filter_threshold() == pytest.approx(0.4)
    three = ReductionParams(kind="three-message", xi=0.9, k=3, t=3, **DESK)
    assert three.prepare_threshold(1, 2) == pytest.approx(0.9 - 0.5 - 9 * 0.25)


def test_trivial_success_threshold_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="reductions.params"):
        params = ReductionParams(kind="public-coin", xi=0.9, k=3, t=3, m=2, **DESK)
    assert params.trivial_success_threshold
    assert params.to_record()["trivial_success_threshold"] is True
    assert "not positive" in caplog.text
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="reductions.params"):
        params = ReductionParams(kind="public-coin", xi=0.9, k=3, t=3, m=2, **{**DESK, "epsilon0": 0.1})
    assert not params.trivial_success_threshold
    assert caplog.text == ""
    three = ReductionParams(kind="three-message", xi=0.9, k=3, t=3, **DESK)
    assert not three.trivial_success_threshold


def test_check_run_rejects_bad_inputs():
    protocol = repeat(always_accept(1), 1, 1)
    prover = passive_prover(protocol)
    three = ReductionParams(kind="three-message", xi=1.0, k=1, t=1, **DESK)
    with pytest.raises(ParameterError):
        check_run(prover, protocol, three, "public-coin", prover.copies(2))
    params = ReductionParams(kind="public-coin", xi=1.0, k=1, t=1, **{**DESK, "iterations": 3})
    with pytest.raises(ParameterError):
        check_run(prover, protocol, params, "public-coin", prover.copies(2))
    derived = ReductionParams(kind="public-coin", mode="paper", xi=1.0, k=1, t=1)
    with pytest.raises(IntractableInstanceError):
        check_run(prover, protocol, derived, "public-coin", prover.copies(derived.resolved().iterations))


# sessions

def test_public_coin_session_order(rng):
    session = PublicCoinVerifier(subset(4, 2), rng)
    with pytest.raises(ProtocolError):
        session.respond(0)
    session.next_query()
    with pytest.raises(ProtocolError):
        session.next_query()
    with pytest.raises(ProtocolError):
        session.verdict()
    session.respond(0)
    assert session.complete
    assert session.verdict() in (0, 1)


def test_scripted_public_coin_session():
    session = ScriptedVerifier(subset(4, 2), [3])
    assert session.next_query() == 3
    session.respond(0)
    assert session.verdict() == 0
    with pytest.raises(ProtocolError):
        ScriptedVerifier(subset(4, 2), [1, 2])


def test_scripted_three_message_session():
    session = ScriptedVerifier(preimage(4, 2), [3])
    assert session.receive_first(0) == 1
    session.respond(3)
    assert session.verdict() == 1
    with pytest.raises(ProtocolError):
        ScriptedVerifier(preimage(4, 2), [9])


def test_open_session_matches_kind(rng):
    assert isinstance(open_session(subset(4, 2), rng), PublicCoinVerifier)
    assert isinstance(open_session(preimage(4, 2), rng), ThreeMessageVerifier)


# checkcoins

def test_final_round_checkcoins_is_bottom_or_top(rng):
    protocol = repeat(parity(2), 2, 2)
    prover = product_prover(rotation_prover(pi / 7), 2)
    residuals = ResidualMeasurements(prover, protocol)
    for qbar in protocol.query_space(1):
        for _ in range(10):
            p, _ = checkcoins(residuals, 1, (), qbar, prover.initial_state, 0.1, 0.05, rng)
            assert p in (0.0, 1.0)


def test_top_cell_probability_matches_enumeration():
    theta = pi / 7
    protocol = repeat(parity(2), 2, 2)
    prover = product_prover(rotation_prover(theta), 2)
    residuals = ResidualMeasurements(prover, protocol)
    for qbar in protocol.query_space(1):
        law = dict(outcome_distribution(residuals.checkcoins(1, (), qbar, 0.1, 0.05), prover.initial_state))
        assert law.get(1.0, 0.0) == pytest.approx(cos(theta) ** 4, abs=1e-9)


def test_subset_checkcoins_is_deterministic_per_query(rng):
    protocol = repeat(subset(4, 2), 2, 2)
    prover = passive_prover(protocol)
    residuals = ResidualMeasurements(prover, protocol)
    for qbar in protocol.query_space(1):
        p, _ = checkcoins(residuals, 1, (), qbar, prover.initial_state, 0.1, 0.05, rng)
        assert p == float(protocol.accept(((qbar, (0, 0)),)))


def test_winning_state_is_top_cell(rng):
    protocol = repeat(always_accept(2), 2, 2)
    prover = passive_prover(protocol)
    residuals = ResidualMeasurements(prover, protocol)
    p, _ = checkcoins(residuals, 1, (), (0, 0), prover.initial_state, 0.1, 0.05, rng)
    assert p == 1.0
    with pytest.raises(ProtocolError):
        checkcoins(residuals, 3, (), (0, 0), prover.initial_state, 0.1, 0.05, rng)


def test_embedded_query_sampling(rng):
    protocol = repeat(subset(3, 1), 2, 2)
    space = protocol.query_space(1)
    counts = dict.fromkeys(space, 0)
    trials = 9000
    for _ in range(trials):
        q = int(rng.integers(3))
        i = int(rng.integers(2))
        qbar = sample_embedded_query(protocol, 1, i, q, rng)
        assert qbar[i] == q
        counts[qbar] += 1
    assert chisquare(list(counts.values())).pvalue > 1e-3


# softdecision

def test_acceptance_probability():
    assert acceptance_probability(1.0, 3, 1) == pytest.approx(0.5)
    assert acceptance_probability(0.7, 4, 3) == 1.0
    assert acceptance_probability(0.7, 4, 5) == 1.0


def test_softdecision_accepts_when_enough_siblings_accept(rng):
    protocol = repeat(programmable(4), 4, 3)
    r_minus_j, tau = level_transcript(4, 1, 2)
    for _ in range(200):
        assert softdecision(protocol, 1.3, 3, 1, r_minus_j, tau, sample_omega(rng)) == 1


@pytest.mark.parametrize("nu,t,level", [(1.0, 3, 1), (0.5, 4, 1), (2.0, 4, 0), (0.25, 3, 0)])
def test_softdecision_frequency(rng, nu, t, level):
    k = 4
    protocol = repeat(programmable(4), k, t)
    r_minus_j, tau = level_transcript(k, 0, level)
    trials = 20_000
    hits = sum(softdecision(protocol, nu, t, 0, r_minus_j, tau, sample_omega(rng)) for _ in range(trials))
    p = acceptance_probability(nu, t, level)
    assert abs(hits / trials - p) <= 3 * sqrt(p * (1 - p) / trials) + 1e-12


def test_hard_decision_needs_every_sibling():
    protocol = repeat(programmable(4), 3, 2)
    r_minus_j, tau = level_transcript(3, 2, 1)
    assert softdecision(protocol, 5.0, 2, 2, r_minus_j, tau, 0, decision="hard") == 0
    r_minus_j, tau = level_transcript(3, 2, 2)
    assert softdecision(protocol, 5.0, 2, 2, r_minus_j, tau, OMEGA_SPACE - 1, decision="hard") == 1


def test_softdecision_input_checks():
    protocol = repeat(programmable(4), 3, 2)
    r_minus_j, tau = level_transcript(3, 0, 1)
    with pytest.raises(ProtocolError):
        softdecision(protocol, 1.0, 2, 0, r_minus_j[:1], tau, 0)
    with pytest.raises(ParameterError):
        softdecision(protocol, 1.0, 2, 0, r_minus_j, tau, OMEGA_SPACE)
    with pytest.raises(ParameterError):
        softdecision(protocol, 1.0, 2, 0, r_minus_j, tau, 0, decision="firm")


def test_constant_predicates_leave_state_unchanged(rng):
    protocol = repeat(programmable(4), 2, 1)
    prover = passive_prover(protocol)
    state = prover.initial_state
    always = SoftDecisionProjections(prover, protocol, (0, 0), nu=1.0, t=1)
    post, b = softdecision_proj(always, 0, (2,), 1, sample_omega(rng), state, rng)
    assert b == 1 and np.allclose(post.vector, state.vector)
    never = SoftDecisionProjections(prover, protocol, (0, 0), nu=1.0, t=1, decision="hard")
    post, b = softdecision_proj(never, 0, (2,), 1, sample_omega(rng), state, rng)
    assert b == 0 and np.allclose(post.vector, state.vector)
    with pytest.raises(ProtocolError):
        softdecision_proj(always, 0, (2, 3), 1, 0, state, rng)


def test_superposed_responses_split_evenly(rng):
    first = (response_register(1, 0), response_register(1, 1))
    second = (response_register(2, 0), response_register(2, 1))
    layout = RegisterLayout.of((first[0], 1), (second[0], 2), (first[1], 1), (second[1], 2))
    state = QuantumState.pure(layout, np.array([1, 1, 0, 0]) / np.sqrt(2))
    prover = ProverStrategy(state, (lambda qbar: None,), (second,), first, name="superposed")
    protocol = repeat(programmable(4), 2, 2)
    projections = SoftDecisionProjections(prover, protocol, (0, 0), nu=1.0, t=2, decision="hard")
    measurement = projections.measurement(0, (3,), 2, 0)
    assert projections.query(0, (3,), 2) == (2, 3)
    assert dict(born_probabilities(state, measurement))[1] == pytest.approx(0.5)
    trials = 4000
    ones = sum(softdecision_proj(projections, 0, (3,), 2, 0, state, rng)[1] for _ in range(trials))
    assert abs(ones / trials - 0.5) <= 3 * sqrt(0.25 / trials)


def test_decision_projection_commutes_with_diagonal_state(rng):
    protocol = repeat(programmable(4), 2, 2)
    prover = bad_correlations_prover(2, 0.5, n=4)
    projections = SoftDecisionProjections(prover, protocol, (0, 0), nu=0.5, t=2)
    layout = prover.layout
    rho = QuantumState.mixed(layout, np.diag(rng.dirichlet(np.ones(layout.total_dim))))
    measurement = projections.measurement(1, (2,), 0, sample_omega(rng))
    averaged = sum(p * normalized_branch(rho, measurement, label) for label, p in born_probabilities(rho, measurement))
    assert np.allclose(np.diag(averaged), np.diag(rho.density()))


# public-coin reduction

def test_always_accept_reduction_completes(rng_factory):
    protocol = repeat(always_accept(2), 2, 2)
    prover = passive_prover(protocol)
    params = ReductionParams(kind="public-coin", xi=1.0, k=2, t=2, m=2, **DESK)
    for seed in range(5):
        rng = rng_factory(seed)
        record = run_public_coin_reduction(prover, protocol, params, open_session(protocol.base, rng_factory(seed, 1)),
                                           prover.copies(2), rng, seed=seed)
        assert record.completed
        assert record.external_verdict == 1
        assert protocol.accept(record.transcript.entries) == 1
        assert len(record.rounds) == 2


def test_public_coin_logs_respect_embedding_and_thresholds(rng_factory):
    protocol = repeat(subset(10, 9), 3, 3)
    prover = passive_prover(protocol)
    params = ReductionParams(kind="public-coin", xi=0.729, k=3, t=3, mode="desk", iterations=10,
                             epsilon0=0.1, epsilon=0.05, delta=0.1, eta=0.5, flooding_T=2)
    completed = 0
    for seed in range(30):
        record = run_public_coin_reduction(prover, protocol, params, open_session(protocol.base, rng_factory(seed, 1)),
                                           prover.copies(10), rng_factory(seed), seed=seed)
        for log in record.rounds:
            for attempt in log.attempts:
                assert attempt.query[record.i] == log.external_query
                assert attempt.threshold == pytest.approx(params.prepare_threshold(log.round, attempt.attempt))
                assert attempt.to_record()["oracle_limit_ok"] is attempt.oracle_limit_ok
        flagged = sum(not a.oracle_limit_ok for log in record.rounds for a in log.attempts)
        assert record.to_record()["oracle_limit_violations"] == record.oracle_limit_violations == flagged
        if record.completed:
            completed += 1
            assert protocol.accept(record.transcript.entries) == 1
            assert record.external_verdict == record.verdicts[record.i] == 1
        else:
            assert record.abort_cause in set(AbortCause)
            assert record.transcript.aborted and record.transcript.verdicts is None
    assert completed > 0


def test_public_coin_reduction_on_rotated_prover(rng_factory):
    protocol = repeat(parity(2), 2, 2)
    prover = product_prover(rotation_prover(pi / 7), 2)
    xi = exact_success(prover, protocol)
    assert xi == pytest.approx(cos(pi / 7) ** 4)
    params = ReductionParams(kind="public-coin", xi=xi, k=2, t=2, m=1, mode="desk", iterations=6,
                             epsilon0=0.1, epsilon=0.05, delta=0.1, eta=0.5, flooding_T=2)
    assert not params.trivial_success_threshold
    completed = 0
    for seed in range(20):
        record = run_public_coin_reduction(prover, protocol, params, open_session(protocol.base, rng_factory(seed, 1)),
                                           prover.copies(6), rng_factory(seed), seed=seed)
        for log in record.rounds:
            for attempt in log.attempts:
                assert attempt.query[record.i] == log.external_query
                assert attempt.threshold == pytest.approx(params.prepare_threshold(log.round, attempt.attempt))
                if attempt.success:
                    assert attempt.p_prepare >= attempt.threshold
                    assert attempt.p_check >= params.success_threshold(log.round)
        if record.completed:
            completed += 1
            assert protocol.accept(record.transcript.entries) == 1
            assert record.external_verdict == record.verdicts[record.i] == 1
    assert completed > 0


def test_step2_exhausted_when_filter_cannot_pass(rng):
    protocol = repeat(subset(4, 1), 2, 2)
    prover = passive_prover(protocol)
    params = ReductionParams(kind="public-coin", xi=1.0, k=2, t=2, mode="desk", iterations=3,
                             epsilon0=0.1, epsilon=0.05, delta=0.1, eta=0.5, flooding_T=2)
    record = run_public_coin_reduction(prover, protocol, params, open_session(protocol.base, rng),
                                       prover.copies(3), rng)
    assert record.abort_cause is AbortCause.STEP2_EXHAUSTED
    assert record.step2_attempts == 3
    assert record.to_record()["abort_cause"] == "step2-exhausted"


# three-message reduction

def test_perfect_prover_reduction_forwards_winning_answer(rng_factory):
    protocol = repeat(preimage(2, 2), 2, 2)
    prover = product_prover(perfect_prover(preimage(2, 2)), 2)
    params = ReductionParams(kind="three-message", xi=1.0, k=2, t=2, **DESK)
    for seed in range(5):
        record = run_three_message_reduction(prover, protocol, params,
                                             open_session(protocol.base, rng_factory(seed, 1)),
                                             prover.copies(2), rng_factory(seed), seed=seed)
        assert record.completed
        assert record.external_verdict == 1
        assert record.verdicts == (1, 1)


def test_last_decision_accepts_final_transcript(rng_factory):
    k, t = 3, 3
    protocol = repeat(programmable(4), k, t)
    prover = bad_correlations_prover(k, 0.7, n=4)
    params = ReductionParams(kind="three-message", xi=0.343, k=k, t=t, mode="desk", iterations=8,
                             epsilon0=0.1, epsilon=0.05, delta=0.1, eta=0.5, flooding_T=2, nu=0.8)
    for seed in range(10):
        record = run_three_message_reduction(prover, protocol, params,
                                             open_session(protocol.base, rng_factory(seed, 1)),
                                             prover.copies(8), rng_factory(seed), seed=seed)
        if not record.completed:
            continue
        last = record.rounds[-1].attempts[-1]
        assert last.success and last.p_check == 1.0
        (qbar, z2bar), = record.transcript.entries
        assert qbar[record.i] == record.rounds[-1].external_query
        tau = (record.transcript.first_message, qbar, z2bar)
        assert softdecision(protocol, 0.8, t, record.i, last.randomness, tau, last.omega) == 1


@pytest.mark.slow
def test_soft_decision_fails_less_than_hard_decision():
    k, delta = 5, 0.8
    protocol = repeat(programmable(4), k, k)
    prover = bad_correlations_prover(k, delta, n=4)
    failure = {}
    for decision in ("soft", "hard"):
        params = ReductionParams(kind="three-message", xi=delta ** k, k=k, t=k, mode="desk", iterations=10,
                                 epsilon0=0.1, epsilon=0.02, delta=0.1, eta=0.5, flooding_T=2)
        completed = failed = 0
        for seed in range(400):
            record = run_three_message_reduction(prover, protocol, params,
                                                 open_session(protocol.base, make_rng(seed, 1)),
                                                 prover.copies(10), make_rng(seed), seed=seed, decision=decision)
            if record.completed:
                completed += 1
                failed += record.external_verdict == 0
        failure[decision] = failed / completed
    assert failure["soft"] < failure["hard"]


# deferred measurement

def test_deferred_deterministic_continuation():
    protocol = repeat(always_accept(2), 1, 1)
    prover = passive_prover(protocol)
    result = deferred_measurement_check(prover, protocol, prover.initial_state, (), (0,), 1, 0.1, 0.05)
    assert result.check_first == {(1.0, (0,)): pytest.approx(1.0)}
    assert result.respond_first == {(1.0, (0,)): pytest.approx(1.0)}
    assert result.passed


def test_deferred_commuting_case_is_exact():
    protocol = repeat(subset(4, 2), 2, 1)
    prover = passive_prover(protocol)
    result = deferred_measurement_check(prover, protocol, prover.initial_state, (), (1, 3), 1, 0.1, 0.05)
    assert result.distance == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_deferred_random_instance(rng_factory, seed):
    rng = rng_factory(seed)
    protocol = two_round_parity()
    prover = haar_prover(protocol, rng)
    state = random_pure(prover.layout, rng)
    for q in (0, 1):
        result = deferred_measurement_check(prover, protocol, state, (), (q,), 1, 0.1, 0.05)
        assert result.distance <= 1e-9
    last = deferred_measurement_check(prover, protocol, state, (((0,), (1,)),), (1,), 2, 0.1, 0.05)
    assert last.distance <= 1e-9
    assert {value for value, _ in last.check_first} <= {0.0, 1.0}


def test_deferred_sampled_orderings_agree(rng):
    protocol = parity(2)
    prover = haar_prover(protocol, rng)
    result = deferred_measurement_check(prover, protocol, prover.initial_state, (), (1,), 1, 0.1, 0.05,
                                        trials=2000, rng=rng)
    assert result.trials == 2000
    assert result.sampled_distance <= 0.1
    with pytest.raises(ProtocolError):
        deferred_measurement_check(prover, protocol, prover.initial_state, (), (1,), 1, 0.1, 0.05, trials=10)


def test_deferred_needs_public_coin():
    protocol = preimage(4, 2)
    prover = perfect_prover(preimage(2, 2))
    with pytest.raises(ProtocolError):
        deferred_measurement_check(prover, protocol, prover.initial_state, (), (0,), 1, 0.1, 0.05)


def test_derived_iterations_round_up():
    params = ReductionParams(kind="public-coin", mode="paper", xi=0.3, lam=2, k=2, t=2, m=2)
    assert params.resolved().iterations == ceil(2 * 4 / 0.3)
