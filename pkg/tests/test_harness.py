import json
from math import exp, log2, pi, sqrt
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

import run_experiments
from harness import (
    ExperimentConfig,
    ProverSpec,
    ResultStore,
    SUITES,
    all_events,
    bound_informal,
    bound_public,
    bound_table,
    bound_three,
    build_prover,
    estimate_success,
    chung_example_table,
    flooding_check,
    flooding_sweep,
    hppw_check,
    increases_in_k,
    normalize,
    public_guarantee,
    random_joint_law,
    raz_check,
    raz_sweep,
    run_config,
    run_properties,
    run_trials,
    sigma_band,
    three_guarantee,
    three_message_margin,
    wilson_interval,
)
from protocols import BadCorrelationsLaw, exact_success, parity, product_prover, repeat, rotation_prover, subset
from utils.errors import CatalogError, ConfigError, IntractableInstanceError, ParameterError


# statistics

def test_wilson_interval_contains_estimate():
    result = wilson_interval(50, 100)
    assert result.estimate == 0.5
    assert result.low < 0.5 < result.high
    assert result.contains(0.5)


def test_wilson_interval_shrinks_with_trials():
    assert wilson_interval(500, 1000).half_width < wilson_interval(50, 100).half_width


def test_wilson_interval_edges():
    assert wilson_interval(0, 10).low == 0.0
    assert wilson_interval(10, 10).high == 1.0
    assert wilson_interval(0, 0).interval == (0.0, 1.0)
    with pytest.raises(ParameterError):
        wilson_interval(11, 10)


def test_sigma_band():
    assert sigma_band(0.5, 0.5, 100)
    assert not sigma_band(0.7, 0.5, 100)
    with pytest.raises(ParameterError):
        sigma_band(0.5, 0.5, 0)


def test_run_trials_keeps_order_and_seeds():
    first = run_trials(lambda index, seed: (index, seed), 7, 12, workers=4)
    assert [index for index, _ in first] == list(range(12))
    assert first == run_trials(lambda index, seed: (index, seed), 7, 12, workers=1)
    assert len({seed for _, seed in first}) == 12


def test_estimate_success_matches_exact():
    protocol = repeat(parity(2), 2, 1)
    prover = product_prover(rotation_prover(pi / 5), 2)
    exact = exact_success(prover, protocol)
    trials = 4000
    result = estimate_success(prover, protocol, trials, seed=3, workers=2)
    assert result.trials == trials
    assert sigma_band(result.estimate, exact, trials)
    assert estimate_success(prover, protocol, trials, seed=3) == result


# Raz's lemma

def test_raz_or_event():
    check = raz_check(2, [(0.5, 0.5)] * 2, lambda x: x[0] == 1 or x[1] == 1)
    assert check.lhs == pytest.approx(1 / 6)
    assert check.bound == pytest.approx(sqrt(-log2(0.75) / 2))
    assert check.bound == pytest.approx(0.45554, abs=1e-5)
    assert check.passed


def test_raz_accepts_mask_and_certain_event():
    mask = np.array([[False, True], [True, True]])
    assert raz_check(2, [(0.5, 0.5)] * 2, mask).lhs == pytest.approx(1 / 6)
    certain = raz_check(2, [(0.5, 0.5)] * 2, lambda x: True)
    assert certain.lhs == pytest.approx(0.0, abs=1e-12)
    assert certain.bound == 0.0


def test_raz_rejects_empty_event():
    with pytest.raises(ParameterError):
        raz_check(2, [(0.5, 0.5)] * 2, lambda x: False)


@pytest.mark.parametrize("k", [2, 3])
def test_raz_sweep_passes(k):
    checks = raz_sweep(k)
    assert len(checks) == (1 << (1 << k)) - 1
    assert all(check.passed for check in checks)


def test_raz_sweep_with_skewed_marginals():
    assert all(check.passed for check in raz_sweep(2, (0.2, 0.3, 0.5)))
    checks = [raz_check(2, [(0.8, 0.2), (0.6, 0.4)], event) for event in all_events((2, 2))]
    assert all(check.passed for check in checks)


def test_all_events_is_bounded():
    with pytest.raises(IntractableInstanceError):
        next(all_events((5, 5)))


# flooding lemma

def test_flooding_copy_of_first_round():
    check = flooding_check(1, 8, (0.5, 0.5), lambda y: y[0])
    assert check.bound == pytest.approx(0.25)
    assert check.lhs == pytest.approx(1 / 16)
    assert check.passed


def test_flooding_constant_memory_is_zero():
    check = flooding_check(1, 3, (0.3, 0.7), np.zeros(8, dtype=int))
    assert check.lhs == pytest.approx(0.0, abs=1e-12)


def test_flooding_memory_must_fit():
    with pytest.raises(ParameterError):
        flooding_check(1, 2, (0.5, 0.5), lambda y: 2)
    with pytest.raises(ParameterError):
        flooding_check(1, 2, (0.5, 0.5), np.zeros(3, dtype=int))


def test_flooding_exhaustive_sweep():
    checked, passing, worst = flooding_sweep(2)
    assert checked == 16
    assert passing == checked
    assert worst == pytest.approx(0.25)


def test_flooding_sampled_sweep(rng):
    checked, passing, worst = flooding_sweep(6, samples=300, rng=rng)
    assert checked == passing == 300
    assert worst <= sqrt(1 / 12)
    with pytest.raises(ParameterError):
        flooding_sweep(6, samples=10)
    with pytest.raises(IntractableInstanceError):
        flooding_sweep(6)


# soft-threshold lemma

def test_hppw_on_point_mass():
    check = hppw_check({(1, 1): 1.0}, nu=1.0, t=2)
    assert check.lhs == pytest.approx(0.0)
    assert check.bound == pytest.approx(1.5)


def test_hppw_single_coordinate():
    check = hppw_check({(0,): 0.5, (1,): 0.5}, nu=2.0, t=1)
    assert check.lhs == pytest.approx(0.2)
    assert check.bound == pytest.approx(1.5)


@pytest.mark.parametrize("delta", [0.5, 0.7, 0.9])
@pytest.mark.parametrize("nu", [0.5, 1.0, 2.0])
def test_hppw_on_bad_correlations(delta, nu):
    law = BadCorrelationsLaw(4, delta).joint_law()
    assert hppw_check(law, nu, 4).passed


def test_hppw_on_random_laws(rng):
    for _ in range(50):
        k = int(rng.integers(1, 6))
        law = random_joint_law(rng, k)
        try:
            check = hppw_check(law, 1.0, k)
        except ParameterError:
            continue
        assert check.passed


def test_hppw_input_checks():
    with pytest.raises(ParameterError):
        hppw_check({(1, 1): 1.0}, nu=0.0, t=1)
    with pytest.raises(ParameterError):
        hppw_check({(1, 1): 1.0}, nu=1.0, t=3)
    with pytest.raises(ParameterError):
        hppw_check({(1, 2): 1.0}, nu=1.0, t=1)


def test_chung_table_soft_beats_hard():
    rows = chung_example_table(2, 0.5)
    hard, *soft = rows
    assert hard["decision"] == "hard"
    assert hard["conditional_failure"] == pytest.approx(BadCorrelationsLaw(2, 0.5).conditional_failure(0))
    assert [row["nu"] for row in soft] == [0.5, 1.0, 2.0]
    assert soft[1]["conditional_failure"] == pytest.approx(0.375 / 0.8125)
    assert all(row["conditional_failure"] < hard["conditional_failure"] for row in soft)
    assert set(hard) == {"k", "delta", "decision", "nu", "conditional_failure"}


# bounds

def test_bound_public_value():
    bound = bound_public(0.5, 2, 100, 100)
    assert bound.value == pytest.approx(24 * exp(-1.5625))
    assert bound.vacuous
    assert bound.clamped == 1.0


def test_bound_public_precondition():
    bound = bound_public(0.6, 1, 10, 5)
    assert not bound.precondition
    assert bound.vacuous
    with pytest.raises(ParameterError):
        bound_public(0.5, 1, 10, 11)


def test_bound_three():
    assert three_message_margin(10_000, 10_000) == pytest.approx(1 - 2 * log2(10_000) / 100)
    bound = bound_three(0.5, 10_000, 10_000)
    assert bound.precondition
    assert not bound.vacuous
    assert bound.value < 1e-20


def test_bound_informal():
    assert bound_informal(0.5, 4).value == pytest.approx(0.5)
    assert bound_informal(0.5, 4, m=2).value == pytest.approx(2 ** -0.25)
    assert bound_informal(0.25, 4, t=2, variant="threshold").value == pytest.approx(2 ** -0.25)
    with pytest.raises(ParameterError):
        bound_informal(0.5, 4, variant="threshold")
    with pytest.raises(ParameterError):
        bound_informal(0.5, 4, variant="partial")


def test_guarantees():
    public = public_guarantee(1.0, 1, 100, 100)
    assert public.value == pytest.approx(1 - 2 * sqrt(log2(3) / 100))
    assert three_guarantee(1.0, 100, 100).value == pytest.approx(three_message_margin(100, 100))
    assert three_guarantee(1e-6, 10, 5).vacuous
    with pytest.raises(ParameterError):
        public_guarantee(0.0, 1, 10, 10)


def test_bound_table_grid():
    rows = bound_table(0.5, [10, 100], [0.5, 1.0])
    assert [(row["k"], row["t"]) for row in rows] == [(10, 5), (10, 10), (100, 50), (100, 100)]
    assert set(rows[0]) == {"k", "t", "m", "epsilon", "public", "three", "informal"}


def test_bounds_decrease_in_k():
    ks = [10, 100, 1000, 10_000, 100_000]
    compared = {"public": 0, "three": 0}
    for ratio in (0.5, 0.75, 1.0):
        rows = bound_table(0.1, ks, [ratio], m=2)
        assert [row["k"] for row in rows] == ks
        for key in compared:
            for before, after in zip(rows, rows[1:]):
                if before[key]["precondition"] and after[key]["precondition"]:
                    compared[key] += 1
                    assert after[key]["value"] <= before[key]["value"]
    assert compared["public"] == 12
    assert compared["three"] > 0
    assert increases_in_k(0.1, ks, [0.5, 0.75, 1.0], m=2) == []
    assert not bound_three(0.1, 100, 100).precondition
    assert bound_three(0.1, 1000, 1000).precondition


# storage

def test_normalize_fixes_precision():
    assert normalize(np.float64(1 / 3)) == 0.333333333333
    assert normalize({"a": (np.int64(2), float("nan"))}) == {"a": [2, "nan"]}
    assert normalize(np.bool_(True)) is True


def test_result_store(tmp_path):
    store = ResultStore(tmp_path / "nested" / "out.jsonl")
    assert store.count() == 0
    assert store.insert_many([{"b": 1, "a": 0.5}, {"c": None}]) == 2
    store.insert_one({"d": [1, 2]})
    assert store.count() == 3
    assert store.read_all()[0] == {"a": 0.5, "b": 1}
    store.clear()
    assert store.read_all() == []


# experiments

def test_config_validation(tmp_path):
    with pytest.raises(ValidationError):
        ExperimentConfig(kind="lemma-check", seed=1)
    with pytest.raises(ValidationError):
        ExperimentConfig(kind="reduction-run", seed=1)
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(path)


def test_config_from_file(tmp_path):
    path = tmp_path / "bounds.json"
    path.write_text(json.dumps({"kind": "bound-table", "seed": 3, "ks": [10], "ratios": [1.0]}))
    config = ExperimentConfig.from_file(path)
    assert config.ks == [10]
    assert config.variant == "full"


def test_build_prover_checks_parameters():
    protocol = repeat(subset(4, 2), 2, 2)
    with pytest.raises(CatalogError):
        build_prover(ProverSpec(name="bad-correlations"), protocol, 1)
    assert exact_success(build_prover(ProverSpec(name="passive"), protocol, 1), protocol) == pytest.approx(0.25)


def test_bound_table_output_is_deterministic(tmp_path):
    output = tmp_path / "bounds.jsonl"
    config = ExperimentConfig(kind="bound-table", seed=5, ks=[10, 100], ratios=[0.5, 1.0], output=str(output))
    assert run_config(config).passed
    first = output.read_bytes()
    assert run_config(config).passed
    assert output.read_bytes() == first
    lines = first.decode().splitlines()
    assert len(lines) == 5
    assert json.loads(lines[-1])["summary"] is True


def test_raz_lemma_experiment():
    config = ExperimentConfig(kind="lemma-check", suite="raz", seed=1, lemmas={"raz_sizes": [2]})
    result = run_config(config)
    assert result.passed
    assert result.aggregates["checks"] == 15


def test_flooding_lemma_experiment():
    lemmas = {"rounds": [1, 2], "sampled_rounds": [4], "samples": 200}
    result = run_config(ExperimentConfig(kind="lemma-check", suite="flooding", seed=1, lemmas=lemmas))
    assert result.passed
    assert [record["mode"] for record in result.records] == ["exhaustive", "exhaustive", "sampled"]


def test_hppw_lemma_experiment():
    lemmas = {"hppw_sizes": [2, 3], "deltas": [0.6], "nus": [1.0], "random_laws": 30}
    result = run_config(ExperimentConfig(kind="lemma-check", suite="hppw", seed=2, lemmas=lemmas))
    assert result.passed


@pytest.mark.slow
def test_public_coin_reduction_experiment(tmp_path):
    config = ExperimentConfig(
        kind="reduction-run",
        name="subset-passive",
        seed=11,
        trials=300,
        output=str(tmp_path / "run.jsonl"),
        protocol={"name": "subset", "params": {"n": 10, "s": 9}},
        prover={"name": "passive"},
        xi_source="sampled",
        reduction={"kind": "public-coin", "xi": 0.729, "k": 3, "t": 3, "mode": "desk", "iterations": 10,
                   "epsilon0": 0.1, "epsilon": 0.05, "delta": 0.1, "eta": 0.5, "flooding_T": 2},
    )
    result = run_config(config)
    aggregates = result.aggregates
    assert aggregates["embedding_ok"]
    assert aggregates["transcripts_consistent"]
    assert aggregates["embedded_rate_ok"]
    assert aggregates["xi"] == pytest.approx(0.729, abs=0.05)
    assert aggregates["oracle_limit_violations"] >= 0
    assert result.passed
    assert ResultStore(config.output).count() == 301


# properties and CLI

def test_property_suites_hold():
    results = run_properties(20240607)
    assert {result.package for result in results} == set(SUITES)
    failed = [result.to_record() for result in results if not result.passed]
    assert not failed


def test_property_suites_can_be_restricted():
    results = run_properties(1, ["hilbert"])
    assert {result.package for result in results} == {"hilbert"}


def test_cli_bounds_exit_code(capsys):
    assert run_experiments.main(["bounds", "--grid", "10,100"]) == 0
    out = capsys.readouterr().out
    assert "Soundness bounds" in out
    assert "All gates passed" in out


def test_cli_lemmas_writes_records(tmp_path):
    assert run_experiments.main(["lemmas", "--suite", "raz", "--out", str(tmp_path)]) == 0
    assert ResultStore(tmp_path / "lemma-raz.jsonl").count() > 0


def test_shipped_configs_validate():
    configs = sorted((Path(__file__).parent.parent / "data" / "configs").glob("*.json"))
    assert configs
    kinds = {ExperimentConfig.from_file(path).kind for path in configs}
    assert kinds == {"lemma-check", "reduction-run", "bound-table"}
