"""
Experiment configuration, dispatch and result aggregation.
"""
import json
import logging
import time
from collections import Counter
from itertools import product
from math import sqrt
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from harness.bounds import bound_table, public_guarantee, three_guarantee
from harness.lemmas import (
    flooding_sweep,
    hppw_check,
    random_joint_law,
    raz_sweep,
)
from harness.statistics import estimate_success, run_trials, wilson_interval
from harness.storage import ResultStore
from memoryless import adversarial_memory_instance, forgetfulness_distance, random_instance
from protocols import (
    BadCorrelationsLaw,
    ProverStrategy,
    RepeatedProtocol,
    bad_correlations_prover,
    exact_success,
    haar_prover,
    optimal_classical_prover,
    passive_prover,
    perfect_prover,
    product_prover,
    repeat,
    resolve,
    rotation_prover,
)
from reductions import (
    ReductionParams,
    ReductionRunRecord,
    open_session,
    run_public_coin_reduction,
    run_three_message_reduction,
    softdecision,
)
from utils.errors import CatalogError, ConfigError
from utils.rng import make_rng

logger = logging.getLogger(__name__)

class ProtocolSpec(BaseModel):
    """Catalog protocol by name and builder parameters."""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., description="Catalog entry, e.g. 'subset'")
    params: Dict[str, Any] = Field(default_factory=dict, description="Builder keyword arguments")


class ProverSpec(BaseModel):
    """Prover builder by name and parameters."""

    model_config = ConfigDict(extra="forbid")

    name: Literal["passive", "product-rotation", "product-optimal", "perfect", "bad-correlations", "haar"]
    params: Dict[str, Any] = Field(default_factory=dict)


class LemmaOptions(BaseModel):
    """Sizes of the lemma-check sweeps."""

    model_config = ConfigDict(extra="forbid")

    raz_sizes: List[int] = Field(default_factory=lambda: [2, 3])
    rounds: List[int] = Field(default_factory=lambda: [1, 2, 3, 4], description="Exhaustive flooding sweeps")
    sampled_rounds: List[int] = Field(default_factory=lambda: [5, 6, 7, 8], description="Sampled flooding sweeps")
    samples: int = Field(10_000, ge=1)
    ell: int = Field(1, ge=1)
    hppw_sizes: List[int] = Field(default_factory=lambda: [2, 3, 4, 5, 6])
    deltas: List[float] = Field(default_factory=lambda: [0.5, 0.7, 0.9])
    nus: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])
    random_laws: int = Field(500, ge=0)
    random_instances: int = Field(5, ge=0)


class ExperimentConfig(BaseModel):
    """One experiment, as read from a JSON config file."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["lemma-check", "reduction-run", "bound-table"]
    name: str = "experiment"
    seed: int = Field(..., description="Master seed; every random stream derives from it")
    trials: int = Field(1, ge=1)
    output: Optional[str] = Field(None, description="JSONL output path")

    suite: Optional[Literal["raz", "flooding", "hppw", "forgetfulness"]] = None
    lemmas: LemmaOptions = Field(default_factory=LemmaOptions)

    protocol: Optional[ProtocolSpec] = None
    prover: Optional[ProverSpec] = None
    reduction: Optional[ReductionParams] = None
    decision: Literal["soft", "hard"] = "soft"
    xi_source: Literal["given", "exact", "sampled"] = "given"
    xi_trials: int = Field(2000, ge=1)

    epsilon: float = Field(0.5, gt=0, lt=1)
    ks: List[int] = Field(default_factory=lambda: [10, 100, 1000, 10_000])
    ratios: List[float] = Field(default_factory=lambda: [0.5, 0.75, 1.0])
    m: int = Field(1, ge=1)
    variant: Literal["full", "threshold"] = "full"

    @model_validator(mode="after")
    def _check_kind(self) -> "ExperimentConfig":
        if self.kind == "lemma-check" and self.suite is None:
            raise ValueError("lemma-check experiments need a suite")
        if self.kind == "reduction-run":
            missing = [name for name in ("protocol", "prover", "reduction") if getattr(self, name) is None]
            if missing:
                raise ValueError(f"reduction-run experiments need {missing}")
        return self

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        """
        Load a config from a JSON file.

        Args:
            path: Config file

        Returns:
            The validated config
        """
        try:
            with open(path, "r", encoding="utf-8") as config_file:
                data = json.load(config_file)
            return cls.model_validate(data)
        except (OSError, json.JSONDecodeError, ValidationError) as exc:
            raise ConfigError(f"Invalid experiment config {path}: {exc}") from exc


class ExperimentResult(BaseModel):
    """Aggregate outcome of one experiment."""

    config: Dict[str, Any]
    records: List[Dict[str, Any]] = Field(default_factory=list)
    aggregates: Dict[str, Any] = Field(default_factory=dict)
    passed: bool = True
    wall_clock: float = 0.0

    def summary_record(self) -> Dict[str, Any]:
        """The summary line written after the per-trial records; wall-clock time is left out."""
        return {"summary": True, "config": self.config, "aggregates": self.aggregates, "passed": self.passed}


# Provers

def build_prover(spec: ProverSpec, protocol: RepeatedProtocol, seed: int) -> ProverStrategy:
    """
    Build the k-fold prover named by ``spec`` for ``protocol``.

    Args:
        spec: Prover name and parameters
        protocol: Repeated protocol fixing the width
        seed: Seed for randomized builders

    Returns:
        The prover strategy
    """
    base, k, params = protocol.base, protocol.k, dict(spec.params)
    try:
        if spec.name == "passive":
            return passive_prover(base, k)
        if spec.name == "product-rotation":
            return product_prover(rotation_prover(float(params.get("theta", 0.0))), k)
        if spec.name == "product-optimal":
            return product_prover(optimal_classical_prover(base), k)
        if spec.name == "perfect":
            return product_prover(perfect_prover(base), k)
        if spec.name == "bad-correlations":
            return bad_correlations_prover(k, float(params["delta"]), int(params.get("n", 4)))
        return product_prover(haar_prover(base, make_rng(seed, 0), int(params.get("internal_dim", 2))), k)
    except (KeyError, TypeError) as exc:
        raise CatalogError(f"Bad parameters {spec.params} for prover {spec.name!r}: {exc}") from exc


# Lemma checks

def _lemma_checks(config: ExperimentConfig) -> Tuple[List[Dict], Dict[str, Any]]:
    options = config.lemmas
    records: List[Dict] = []
    if config.suite == "raz":
        for k in options.raz_sizes:
            for index, check in enumerate(raz_sweep(k)):
                records.append({"k": k, "event": index + 1, **check.to_record()})
    elif config.suite == "flooding":
        for t in options.rounds:
            checked, passing, worst = flooding_sweep(t, options.ell)
            records.append(_sweep_record(t, options.ell, checked, passing, worst, "exhaustive"))
        for t in options.sampled_rounds:
            rng = make_rng(config.seed, t)
            checked, passing, worst = flooding_sweep(t, options.ell, samples=options.samples, rng=rng)
            records.append(_sweep_record(t, options.ell, checked, passing, worst, "sampled"))
    elif config.suite == "hppw":
        for k in options.hppw_sizes:
            for delta in options.deltas:
                law = BadCorrelationsLaw(k, delta).joint_law()
                for nu in options.nus:
                    records.append({"family": "bad-correlations", "delta": delta, **hppw_check(law, nu, k).to_record()})
        rng = make_rng(config.seed, 0)
        for index in range(options.random_laws):
            k = int(rng.integers(1, max(options.hppw_sizes) + 1))
            law = random_joint_law(rng, k)
            t = int(rng.integers(1, k + 1))
            nu = float(options.nus[int(rng.integers(len(options.nus)))])
            levels_mass = _threshold_mass(law, t)
            if levels_mass <= 0.0:
                continue
            records.append({"family": "random", "index": index, **hppw_check(law, nu, t).to_record()})
    else:
        instances = [("adversarial", adversarial_memory_instance())]
        instances += [
            (f"random-{index}", random_instance(make_rng(config.seed, index)))
            for index in range(options.random_instances)
        ]
        for name, (m_family, p_family, state, fp) in instances:
            result = forgetfulness_distance(m_family, p_family, state, fp, make_rng(config.seed, 1000))
            records.append({"instance": name, **result.to_record()})
    passing = sum(1 for record in records if record["passed"])
    return records, {"checks": len(records), "passing": passing, "passed": passing == len(records)}


def _sweep_record(t: int, ell: int, checked: int, passing: int, worst: float, mode: str) -> Dict:
    return {
        "lemma": "flooding",
        "t": t,
        "ell": ell,
        "mode": mode,
        "maps": checked,
        "passing": passing,
        "worst": worst,
        "bound": sqrt(ell / (2 * t)),
        "passed": passing == checked,
    }


def _threshold_mass(law, t: int) -> float:
    return float(sum(law[v] for v in product((0, 1), repeat=law.ndim) if sum(v) >= t))


# Reduction runs

def _measured_xi(config: ExperimentConfig, prover: ProverStrategy, protocol: RepeatedProtocol) -> float:
    if config.xi_source == "exact":
        return exact_success(prover, protocol)
    estimate = estimate_success(prover, protocol, config.xi_trials, int(make_rng(config.seed, 2).integers(1 << 62)))
    return estimate.estimate


def _embedded(record: ReductionRunRecord) -> bool:
    """Every logged q̄ carries the external query at coordinate ``i``."""
    for log in record.rounds:
        if any(attempt.query[record.i] != log.external_query for attempt in log.attempts):
            return False
    return True


def _consistent(record: ReductionRunRecord, protocol: RepeatedProtocol, nu: Optional[float]) -> bool:
    """Completed runs are accepting (public-coin) or end on a recorded SoftDecision of 1 (three-message)."""
    if not record.completed:
        return True
    transcript = record.transcript
    if protocol.kind == "public-coin":
        return protocol.accept(transcript.entries) == 1
    last = record.rounds[-1].attempts[-1]
    if not last.success or last.p_check != 1.0:
        return False
    qbar, z2bar = transcript.entries[0]
    tau = (transcript.first_message, qbar, z2bar)
    return softdecision(protocol, nu, protocol.t, record.i, last.randomness, tau, last.omega, record.decision) == 1


def _reduction_runs(config: ExperimentConfig) -> Tuple[List[Dict], Dict[str, Any]]:
    params = config.reduction
    base = resolve(config.protocol.name, **config.protocol.params)
    if base.kind != params.kind:
        raise ConfigError(f"Protocol {base.name} is {base.kind} but the reduction is {params.kind}")
    protocol = repeat(base, params.k, params.t)
    prover = build_prover(config.prover, protocol, config.seed)
    if config.xi_source != "given":
        params = params.model_copy(update={"xi": _measured_xi(config, prover, protocol)})
    resolved = params.resolved()

    def trial(_, trial_seed):
        external = open_session(base, make_rng(trial_seed, 1))
        copies = prover.copies(resolved.iterations)
        rng = make_rng(trial_seed, 0)
        if params.kind == "public-coin":
            return run_public_coin_reduction(prover, protocol, params, external, copies, rng, seed=trial_seed)
        return run_three_message_reduction(prover, protocol, params, external, copies, rng,
                                           seed=trial_seed, decision=config.decision)

    runs = run_trials(trial, config.seed, config.trials, desc=f"{params.kind} reduction")
    completed = wilson_interval(sum(r.completed for r in runs), len(runs))
    embedded = wilson_interval(sum(r.external_verdict == 1 for r in runs), len(runs))
    failures = wilson_interval(sum(r.completed and r.external_verdict == 0 for r in runs), len(runs))
    causes = Counter(r.abort_cause.value for r in runs if r.abort_cause is not None)
    embedding_ok = all(_embedded(r) for r in runs)
    consistent = all(_consistent(r, protocol, resolved.nu) for r in runs)
    target = protocol.t / protocol.k * completed.estimate
    rate_ok = embedded.estimate >= target - embedded.half_width
    if params.kind == "public-coin":
        guarantee = public_guarantee(params.xi, params.m, params.k, params.t)
    else:
        guarantee = three_guarantee(params.xi, params.k, params.t)
    gate = embedding_ok and consistent and (rate_ok or params.kind != "public-coin")
    aggregates = {
        "protocol": protocol.name,
        "prover": prover.name,
        "xi": params.xi,
        "decision": config.decision,
        "completion": completed.to_record(),
        "embedded_success": embedded.to_record(),
        "embedded_failure": failures.to_record(),
        "abort_causes": dict(sorted(causes.items())),
        "target": target,
        "embedded_rate_ok": rate_ok,
        "embedding_ok": embedding_ok,
        "transcripts_consistent": consistent,
        "oracle_limit_violations": sum(r.oracle_limit_violations for r in runs),
        "guarantee": guarantee.to_record(),
        "negligible_terms": "treated as 0",
        "passed": gate,
    }
    return [run.to_record() for run in runs], aggregates


def run_config(config: ExperimentConfig) -> ExperimentResult:
    """
    Run one experiment and write its records.

    Args:
        config: Validated experiment config

    Returns:
        ExperimentResult; the output file (when configured) holds the records
        followed by the summary and is byte-identical across reruns
    """
    start = time.perf_counter()
    logger.info("Running %s experiment %r (seed %d)", config.kind, config.name, config.seed)
    if config.kind == "lemma-check":
        records, aggregates = _lemma_checks(config)
    elif config.kind == "reduction-run":
        records, aggregates = _reduction_runs(config)
    else:
        records = bound_table(config.epsilon, config.ks, config.ratios, config.m, config.variant)
        aggregates = {
            "rows": len(records),
            "vacuous_public": sum(r["public"]["vacuous"] for r in records),
            "vacuous_three": sum(r["three"]["vacuous"] for r in records),
            "passed": True,
        }
    result = ExperimentResult(
        config=config.model_dump(mode="json"),
        records=records,
        aggregates=aggregates,
        passed=bool(aggregates["passed"]),
        wall_clock=time.perf_counter() - start,
    )
    if config.output:
        store = ResultStore(config.output)
        store.clear()
        store.insert_many(result.records + [result.summary_record()])
    logger.info("Experiment %r %s in %.1fs", config.name, "passed" if result.passed else "FAILED", result.wall_clock)
    return result
