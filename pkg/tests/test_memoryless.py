import logging
from dataclasses import replace

import numpy as np
import pytest

from config import settings
from conftest import random_pure
from harness import wilson_interval
from hilbert import ProjectiveMeasurement, Projector, QuantumState, RegisterLayout, measure_projective
from measure import ValueMeasurementFamily, valest
from memoryless import (
    FloodingParams,
    ProjectionFamily,
    adversarial_memory_instance,
    enumerate_paths,
    forgetfulness_distance,
    prepare,
    random_instance,
    repair_prime,
)
from utils.errors import MeasurementError, ParameterError


def diagonal_family(layout, values=(0.1, 0.4, 0.6, 0.9)):
    return ValueMeasurementFamily(np.diag(values).astype(complex), layout)


# parameters

def test_flooding_rounds_formula():
    fp = FloodingParams(0.1, 0.05, 0.5, ell=2)
    assert fp.T == 64
    assert fp.conformant
    assert fp.inner_epsilon == pytest.approx(0.1 / 128)
    assert fp.inner_delta == pytest.approx(0.05 ** 2 / (64 * 64 ** 2))
    assert fp.inner_eta == pytest.approx(0.5 / 128)


def test_override_is_non_conformant():
    fp = FloodingParams(0.1, 0.05, 0.5, ell=2, T_override=3)
    assert fp.T == 3
    assert not fp.conformant
    assert fp.to_record()["conformant"] is False


@pytest.mark.parametrize("kwargs", [
    {"epsilon": 0.0, "delta": 0.1, "eta": 0.1, "ell": 1},
    {"epsilon": 0.1, "delta": 1.5, "eta": 0.1, "ell": 1},
    {"epsilon": 0.1, "delta": 0.1, "eta": 0.1, "ell": 0},
])
def test_invalid_parameters(kwargs):
    with pytest.raises(ParameterError):
        FloodingParams(**kwargs)


def test_family_labels_must_cover_members():
    layout = RegisterLayout.qubits("a")
    pvm = ProjectiveMeasurement.computational(layout)
    with pytest.raises(MeasurementError):
        ProjectionFamily(("x",), members=(pvm,))


# prepare

def test_prepare_with_single_round_is_one_measurement(rng_factory):
    layout = RegisterLayout.qubits("a", "b")
    m_family = diagonal_family(layout)
    fp = FloodingParams(0.1, 0.05, 0.5, ell=2, T_override=1)
    state = random_pure(layout, rng_factory(0))
    result = prepare(m_family, ProjectionFamily.identity(layout), state, fp, rng_factory(1), t=1)
    assert result.trace.flooding_rounds == 0
    assert result.trace.oracle_calls == 1
    direct = valest(m_family.at(fp.inner_epsilon, fp.inner_delta), state, rng_factory(1))
    assert direct.value == result.value


def test_identity_family_keeps_value(rng):
    layout = RegisterLayout.qubits("a", "b")
    m_family = diagonal_family(layout)
    fp = FloodingParams(0.1, 0.05, 0.5, ell=2, T_override=6)
    for _ in range(10):
        state = valest(m_family.at(fp.inner_epsilon, fp.inner_delta), random_pure(layout, rng), rng).post_state
        before = valest(m_family.at(fp.inner_epsilon, fp.inner_delta), state, rng).value
        result = prepare(m_family, ProjectionFamily.identity(layout), state, fp, rng)
        assert abs(result.value - before) <= fp.inner_epsilon + 1e-12
        assert all(r.value == before for r in result.trace.rounds)


def test_prepare_round_count_and_oracle_calls(rng):
    m_family, p_family, state, fp = random_instance(rng)
    fp = replace(fp, T_override=8)
    for t in range(1, fp.T + 1):
        result = prepare(m_family, p_family, state, fp, rng, t=t)
        assert result.trace.flooding_rounds == t - 1 <= fp.T - 1
        assert result.trace.oracle_calls <= fp.oracle_call_limit()


def test_oracle_limit_defaults_to_setting(monkeypatch):
    fp = FloodingParams(0.1, 0.05, 0.5, ell=2, T_override=4)
    assert fp.oracle_call_limit() == settings.ORACLE_CALL_CONSTANT * (4 + 16 / 0.5)
    monkeypatch.setattr(settings, "ORACLE_CALL_CONSTANT", 2)
    assert fp.oracle_call_limit() == 2 * (4 + 16 / 0.5)
    assert fp.oracle_call_limit(constant=1) == 4 + 16 / 0.5


def test_every_trace_checks_the_oracle_limit(rng):
    m_family, p_family, state, fp = random_instance(rng)
    fp = replace(fp, T_override=5)
    for _ in range(10):
        prepared = prepare(m_family, p_family, state, fp, rng)
        pi = p_family.members[0]
        y, sigma = measure_projective(prepared.state, pi, rng)
        repaired = repair_prime(m_family, p_family, pi, sigma, y, prepared.value, fp, rng)
        for trace in (prepared.trace, repaired.trace):
            assert trace.oracle_limit == fp.oracle_call_limit()
            assert trace.within_oracle_limit == (trace.oracle_calls <= trace.oracle_limit)
            assert trace.to_record()["within_oracle_limit"] is trace.within_oracle_limit


def test_exceeding_the_oracle_limit_is_flagged(rng, monkeypatch, caplog):
    m_family, p_family, state, fp = random_instance(rng)
    fp = replace(fp, T_override=3)
    monkeypatch.setattr(settings, "ORACLE_CALL_CONSTANT", 0)
    with caplog.at_level(logging.WARNING, logger="memoryless.flooding"):
        result = prepare(m_family, p_family, state, fp, rng, t=3)
    assert result.trace.oracle_limit == 0
    assert not result.trace.within_oracle_limit
    assert result.trace.to_record()["within_oracle_limit"] is False
    assert "over the limit" in caplog.text


def test_prepared_value_is_confirmed_by_the_same_grid(rng):
    m_family, p_family, state, fp = adversarial_memory_instance()
    fp = replace(fp, T_override=5)
    m_prime = m_family.at(fp.inner_epsilon, fp.inner_delta)
    for _ in range(20):
        result = prepare(m_family, p_family, state, fp, rng)
        assert valest(m_prime, result.state, rng).value == result.value


# repair_prime

def test_repair_prime_runs_exactly_T_rounds(rng):
    m_family, p_family, state, fp = random_instance(rng)
    fp = replace(fp, T_override=6)
    prepared = prepare(m_family, p_family, state, fp, rng)
    pi = p_family.members[0]
    y, sigma = measure_projective(prepared.state, pi, rng)
    result = repair_prime(m_family, p_family, pi, sigma, y, prepared.value, fp, rng)
    assert result.trace.flooding_rounds == fp.T
    assert result.trace.initial_repair_rounds is not None
    assert result.trace.oracle_calls <= fp.oracle_call_limit()
    assert result.trace.to_record()["procedure"] == "repair_prime"


def test_repair_prime_with_identity_keeps_value(rng):
    layout = RegisterLayout.qubits("a", "b")
    m_family = diagonal_family(layout)
    identity = ProjectionFamily.identity(layout)
    fp = FloodingParams(0.1, 0.05, 0.5, ell=2, T_override=4)
    prepared = prepare(m_family, identity, random_pure(layout, rng), fp, rng)
    pi = identity.members[0]
    y, sigma = measure_projective(prepared.state, pi, rng)
    result = repair_prime(m_family, identity, pi, sigma, y, prepared.value, fp, rng)
    assert result.value == prepared.value
    assert result.trace.initial_repair_rounds == 0


def test_repair_prime_commuting_measurement_needs_no_repair(rng):
    layout = RegisterLayout.qubits("a", "b")
    m_family = diagonal_family(layout)
    pi = ProjectiveMeasurement.computational(layout, "a")
    family = ProjectionFamily.of([pi])
    fp = FloodingParams(0.1, 0.05, 0.5, ell=2, T_override=3)
    prepared = prepare(m_family, family, random_pure(layout, rng), fp, rng)
    y, sigma = measure_projective(prepared.state, pi, rng)
    result = repair_prime(m_family, family, pi, sigma, y, prepared.value, fp, rng)
    assert result.trace.initial_repair_rounds == 0
    assert result.trace.initial_repair_converged


@pytest.mark.slow
def test_prepare_and_repair_preserve_value(rng):
    m_family, p_family, state, fp = random_instance(rng)
    assert fp.T == 64 and fp.conformant
    m = m_family.at(fp.epsilon, fp.delta)
    trials = 500
    prepare_misses = chain_misses = 0
    for _ in range(trials):
        measured = valest(m, state, rng)
        prepared = prepare(m_family, p_family, measured.post_state, fp, rng)
        prepare_misses += abs(measured.value - prepared.value) >= 4 * fp.epsilon
        key, pi = p_family.sample(rng)
        y, sigma = measure_projective(prepared.state, pi, rng)
        repaired = repair_prime(m_family, p_family, pi, sigma, y, prepared.value, fp, rng)
        again = valest(m, repaired.state, rng)
        chain_misses += abs(measured.value - again.value) >= 4 * fp.epsilon
        assert repaired.trace.oracle_calls <= fp.oracle_call_limit()
    bound = p_family.N * (fp.eta + 4 * fp.delta)
    assert wilson_interval(prepare_misses, trials).high <= bound
    assert wilson_interval(chain_misses, trials).high <= bound


# forgetfulness

def test_single_member_family_forgets_perfectly():
    layout = RegisterLayout.qubits("a", "b")
    m_family = diagonal_family(layout)
    family = ProjectionFamily.of([ProjectiveMeasurement.computational(layout, "a")])
    state = QuantumState.pure(layout, np.full(4, 0.5))
    fp = FloodingParams(0.1, 0.05, 0.5, ell=2, T_override=2)
    result = forgetfulness_distance(m_family, family, state, fp)
    assert result.distance == pytest.approx(0.0, abs=1e-12)
    assert result.method == "folded"


def test_commuting_family_on_diagonal_state_forgets():
    layout = RegisterLayout.qubits("a", "b")
    m_family = diagonal_family(layout)
    family = ProjectionFamily.of([
        ProjectiveMeasurement.computational(layout, "a"),
        ProjectiveMeasurement.computational(layout, "b"),
    ])
    state = QuantumState.mixed(layout, np.diag([0.4, 0.3, 0.2, 0.1]))
    fp = FloodingParams(0.1, 0.05, 0.5, ell=2, T_override=2)
    assert forgetfulness_distance(m_family, family, state, fp).distance == pytest.approx(0.0, abs=1e-9)


def test_adversarial_instance_is_positive_and_within_bound():
    m_family, p_family, state, fp = adversarial_memory_instance()
    assert p_family.N == 2 and fp.eta == 0.5 and fp.T == 64
    result = forgetfulness_distance(m_family, p_family, state, fp)
    assert result.interval is None
    assert 0.0 < result.distance <= p_family.N * fp.eta + 1e-9
    assert result.bound == pytest.approx(1.0)
    assert result.passed


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_random_instances_within_bound(rng_factory, seed):
    m_family, p_family, state, fp = random_instance(rng_factory(seed))
    result = forgetfulness_distance(m_family, p_family, state, fp)
    assert result.passed


def test_folded_enumeration_matches_paths():
    m_family, p_family, state, fp = adversarial_memory_instance()
    fp = replace(fp, T_override=2)
    folded = forgetfulness_distance(m_family, p_family, state, fp).distance
    assert enumerate_paths(m_family, p_family, state, fp) == pytest.approx(folded, abs=1e-8)


def test_sampling_fallback_reports_an_interval(rng):
    m_family, p_family, state, fp = adversarial_memory_instance()
    fp = replace(fp, T_override=2)
    implicit = ProjectionFamily(p_family.outcome_labels,
                                sampler=lambda g: (0, p_family.members[int(g.integers(2))]),
                                name="implicit")
    result = forgetfulness_distance(m_family, implicit, state, fp, rng=rng, trajectories=4)
    assert result.method == "sampled"
    low, high = result.interval
    assert 0.0 <= low <= result.distance <= high <= 1.0


def test_record_serializes():
    m_family, p_family, state, fp = adversarial_memory_instance()
    record = forgetfulness_distance(m_family, p_family, state, replace(fp, T_override=2)).to_record()
    assert set(record) == {"distance", "bound", "method", "interval", "work", "passed"}


def test_projector_family_from_rotated_basis():
    layout = RegisterLayout.qubits("a")
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    proj = Projector.from_basis(layout, plus)
    family = ProjectionFamily.of([ProjectiveMeasurement.from_pairs([(0, proj), (1, proj.complement())])])
    assert family.N == 2
    assert len(family) == 1
