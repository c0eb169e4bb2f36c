from itertools import product
from math import cos, pi

import numpy as np
import pytest
from scipy.stats import chisquare

from protocols import (
    BadCorrelationsLaw,
    Transcript,
    always_accept,
    bad_correlations_prover,
    best_guess_prover,
    chained_subset,
    check_compatible,
    exact_success,
    haar_prover,
    optimal_classical_prover,
    optimal_success,
    parity,
    passive_prover,
    perfect_prover,
    preimage,
    product_prover,
    programmable,
    repeat,
    resolve,
    rotation_prover,
    run_interaction,
    subset,
    threshold_verdict,
    verdict_marginals,
)
from utils.errors import CatalogError, IntractableInstanceError, LayoutError, ParameterError, ProtocolError


def empirical_success(prover, protocol, rng, trials):
    return sum(run_interaction(prover, protocol, rng)[1] for _ in range(trials)) / trials


def within_three_sigma(observed, p, trials):
    return abs(observed - p) <= 3 * np.sqrt(p * (1 - p) / trials) + 1e-12


# threshold verdicts and transcripts

def test_threshold_verdict():
    assert threshold_verdict((1, 0, 1), 2) == 1
    assert threshold_verdict((0, 0, 0), 1) == 0
    with pytest.raises(ParameterError):
        threshold_verdict((1, 1), 3)


def test_bottom_transcript_has_no_verdicts():
    bottom = Transcript.bottom(width=3)
    assert bottom.aborted
    assert bottom.verdicts is None
    assert not bottom.complete(1)
    with pytest.raises(ProtocolError):
        Transcript(width=1, aborted=True, verdicts=(1,))


def test_transcript_width_is_checked():
    with pytest.raises(ProtocolError):
        Transcript((((0, 1), (0,)),), width=2)


def test_transcript_coordinate_view():
    transcript = Transcript((((3, 5), (0, 1)), ((2, 4), (1, 1))), width=2, verdicts=(1, 0))
    assert transcript.complete(2)
    assert transcript.coordinate(1) == ((5, 1), (4, 1))


# repetition

def test_single_fold_repetition_matches_base():
    base = subset(4, 2)
    repeated = repeat(base, 1, 1)
    for q in base.query_space(1):
        assert repeated.accept((((q,), (0,)),)) == base.accept(((q, 0),))


@pytest.mark.parametrize("k", [2, 3])
def test_threshold_extremes_are_and_and_or(k):
    base = parity(2)
    all_of, any_of = repeat(base, k, k), repeat(base, k, 1)
    for qbar, zbar in product(all_of.query_space(1), all_of.response_space(1)):
        entries = ((qbar, zbar),)
        coordinates = all_of.coordinate_accepts(entries)
        assert all_of.accept(entries) == int(all(coordinates))
        assert any_of.accept(entries) == int(any(coordinates))


def test_invalid_threshold():
    with pytest.raises(ParameterError):
        repeat(subset(4, 2), 2, 3)
    with pytest.raises(ProtocolError):
        repeat(repeat(subset(4, 2), 2, 1), 2, 1)


def test_subset_repetition_success(rng):
    protocol = repeat(subset(4, 1), 2, 2)
    prover = passive_prover(protocol)
    assert exact_success(prover, protocol) == pytest.approx(1 / 16)
    trials = 20_000
    assert within_three_sigma(empirical_success(prover, protocol, rng, trials), 1 / 16, trials)


def test_or_of_product_provers():
    theta = pi / 5
    p = cos(theta) ** 2
    protocol = repeat(parity(2), 2, 1)
    value = exact_success(product_prover(rotation_prover(theta), 2), protocol)
    assert value == pytest.approx(1 - (1 - p) ** 2, abs=1e-9)


def test_product_success_is_product_of_single_folds(rng):
    theta = pi / 7
    single = rotation_prover(theta)
    protocol = repeat(parity(2), 3, 3)
    prover = product_prover(single, 3)
    expected = exact_success(single, parity(2)) ** 3
    assert exact_success(prover, protocol) == pytest.approx(expected, abs=1e-9)
    trials = 5000
    assert within_three_sigma(empirical_success(prover, protocol, rng, trials), expected, trials)


def test_product_prover_marginals_match_single_fold(rng):
    theta = pi / 6
    p = cos(theta) ** 2
    protocol = repeat(parity(2), 2, 1)
    prover = product_prover(rotation_prover(theta), 2)
    trials = 10_000
    counts = verdict_marginals(run_interaction(prover, protocol, rng)[0] for _ in range(trials))
    for row in counts:
        assert chisquare(row, f_exp=[trials * (1 - p), trials * p]).pvalue > 1e-3


# provers and interaction

def test_qubit_count_is_exposed():
    prover = passive_prover(parity(2), 3)
    assert prover.num_qubits == pytest.approx(3.0)
    assert prover.flooding_ell == 3


def test_always_accept_verdict(rng):
    protocol = always_accept(2)
    transcript, verdict = run_interaction(passive_prover(protocol), protocol, rng)
    assert verdict == 1
    assert transcript.complete(2)
    assert transcript.verdicts == (1,)


def test_interaction_is_reproducible_from_seed():
    protocol = repeat(parity(3), 2, 1)
    prover = product_prover(rotation_prover(pi / 5), 2)
    assert run_interaction(prover, protocol, 7) == run_interaction(prover, protocol, 7)


def test_rotation_prover_success():
    for theta in (0.0, pi / 8, pi / 3):
        assert exact_success(rotation_prover(theta), parity(2)) == pytest.approx(cos(theta) ** 2, abs=1e-9)


def test_optimal_prover_on_subset_game(rng):
    protocol = subset(8, 2)
    prover = optimal_classical_prover(protocol)
    trials = 10_000
    assert within_three_sigma(empirical_success(prover, protocol, rng, trials), 0.25, trials)


def test_best_guess_on_preimage_game(rng):
    protocol = preimage(8, 4)
    prover = best_guess_prover(8, 4)
    assert exact_success(prover, protocol) == pytest.approx(0.5)
    trials = 10_000
    transcript, _ = run_interaction(prover, protocol, rng)
    assert transcript.randomness is not None and transcript.first_message == (0,)
    assert within_three_sigma(empirical_success(prover, protocol, rng, trials), 0.5, trials)


def test_haar_prover_exact_matches_sampled(rng):
    protocol = chained_subset(2, (2, 2))
    prover = haar_prover(protocol, rng)
    assert exact_success(prover, protocol) == pytest.approx(1.0)
    protocol = parity(4)
    prover = haar_prover(protocol, rng)
    exact = exact_success(prover, protocol)
    trials = 5000
    assert within_three_sigma(empirical_success(prover, protocol, rng, trials), exact, trials)


def test_incompatible_prover():
    with pytest.raises(LayoutError):
        check_compatible(passive_prover(parity(2), 2), repeat(parity(2), 3, 1))


# optimal_success

def test_optimal_success_examples():
    assert optimal_success(always_accept()) == 1.0
    assert optimal_success(subset(8, 2)) == pytest.approx(0.25)
    assert optimal_success(chained_subset(4, (2, 2))) == pytest.approx(0.25)
    assert optimal_success(preimage(8, 4)) == pytest.approx(0.5)
    assert optimal_success(parity(2)) == pytest.approx(1.0)


def test_optimal_success_of_threshold_repetition():
    assert optimal_success(repeat(subset(4, 2), 2, 1)) == pytest.approx(0.75)


def test_optimal_over_a_prover_family():
    provers = [rotation_prover(theta) for theta in (pi / 3, pi / 9, pi / 4)]
    assert optimal_success(parity(2), provers) == pytest.approx(cos(pi / 9) ** 2, abs=1e-9)


def test_optimal_success_intractable():
    with pytest.raises(IntractableInstanceError):
        optimal_success(repeat(subset(10, 9), 8, 8))


def test_perfect_prover():
    protocol = preimage(2, 2)
    assert exact_success(perfect_prover(protocol), protocol) == pytest.approx(1.0)
    with pytest.raises(ProtocolError):
        perfect_prover(subset(8, 2))


def test_optimal_classical_prover_needs_one_round():
    with pytest.raises(ProtocolError):
        optimal_classical_prover(chained_subset(4, (2, 2)))


# bad correlations

def test_bad_correlations_law():
    law = BadCorrelationsLaw(2, 0.5)
    joint = law.joint_law()
    assert joint[(1, 1)] == pytest.approx(0.25)
    assert joint[(0, 1)] == pytest.approx(0.375)
    assert joint[(1, 0)] == pytest.approx(0.375)
    assert sum(joint.values()) == pytest.approx(1.0)
    assert BadCorrelationsLaw(2, 0.99).joint_law()[(1, 1)] == pytest.approx(0.9801)


def test_bad_correlations_conditional_failure():
    law = BadCorrelationsLaw(2, 0.5)
    assert law.conditional_failure(0) == pytest.approx(0.375 / 0.625)
    with pytest.raises(ParameterError):
        law.conditional_failure(2)


def test_bad_correlations_prover_realizes_law(rng):
    k, delta = 2, 0.5
    protocol = repeat(programmable(4), k, 1)
    prover = bad_correlations_prover(k, delta, n=4)
    joint = BadCorrelationsLaw(k, delta).joint_law()
    trials = 10_000
    counts = {}
    for _ in range(trials):
        transcript, _ = run_interaction(prover, protocol, rng)
        counts[transcript.verdicts] = counts.get(transcript.verdicts, 0) + 1
    assert set(counts) <= set(joint)
    for pattern, p in joint.items():
        assert within_three_sigma(counts.get(pattern, 0) / trials, p, trials)


def test_bad_correlations_exact_all_accept():
    protocol = repeat(programmable(4), 2, 2)
    assert exact_success(bad_correlations_prover(2, 0.5, n=4), protocol) == pytest.approx(0.25)


# catalog

def test_resolve_by_name():
    assert resolve("subset", n=8, s=2).soundness == pytest.approx(0.25)
    assert resolve("preimage", n=8, w=4).soundness == pytest.approx(0.5)
    with pytest.raises(CatalogError):
        resolve("nonexistent")
    with pytest.raises(CatalogError):
        resolve("subset", size=3)


def test_catalog_parameter_checks():
    with pytest.raises(ParameterError):
        subset(4, 5)
    with pytest.raises(ParameterError):
        preimage(4, 0)


def test_three_message_query_is_a_function_of_randomness():
    protocol = preimage(8, 4)
    assert protocol.query_space() == (0, 1, 2, 3)
    with pytest.raises(ProtocolError):
        protocol.accept(5, (0, 2, 5))
