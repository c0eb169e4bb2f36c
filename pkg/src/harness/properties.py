"""
Small seeded property checks per package, run by the ``props`` subcommand.
"""
import logging
from dataclasses import dataclass, replace
from math import cos, pi
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

from config import settings
from harness.bounds import increases_in_k
from hilbert import (
    ProjectiveMeasurement,
    QuantumState,
    RegisterLayout,
    Unitary,
    apply_unitary,
    born_probabilities,
    measure_projective,
    partial_trace,
    tensor,
    trace_distance,
)
from measure import (
    ValueMeasurement,
    outcome_distribution,
    repair_detailed,
    valest,
    valest_exact,
)
from memoryless import (
    adversarial_memory_instance,
    enumerate_paths,
    forgetfulness_distance,
    prepare,
)
from protocols import (
    BadCorrelationsLaw,
    always_accept,
    bad_correlations_prover,
    exact_success,
    optimal_success,
    parity,
    passive_prover,
    preimage,
    product_prover,
    programmable,
    repeat,
    rotation_prover,
    subset,
)
from reductions import (
    ReductionParams,
    acceptance_probability,
    deferred_measurement_check,
    open_session,
    run_public_coin_reduction,
)
from utils.rng import make_rng

logger = logging.getLogger(__name__)

Check = Callable[[np.random.Generator], Tuple[bool, str]]


@dataclass(frozen=True)
class PropertyResult:
    """Outcome of one property check."""

    package: str
    name: str
    passed: bool
    detail: str

    def to_record(self) -> dict:
        return {"package": self.package, "name": self.name, "passed": self.passed, "detail": self.detail}


def _close(a: float, b: float, tol: Optional[float] = None) -> bool:
    return abs(a - b) <= (settings.LEMMA_SLACK if tol is None else tol)


def _random_pure(layout: RegisterLayout, rng: np.random.Generator) -> QuantumState:
    vec = rng.normal(size=layout.total_dim) + 1j * rng.normal(size=layout.total_dim)
    return QuantumState.pure(layout, vec / np.linalg.norm(vec))


def _random_operator(layout: RegisterLayout, rng: np.random.Generator) -> np.ndarray:
    u = unitary_group.rvs(layout.total_dim, random_state=rng)
    return u @ np.diag(rng.uniform(0.0, 1.0, size=layout.total_dim)) @ u.conj().T


# hilbert

def _unitary_keeps_norm(rng):
    layout = RegisterLayout.qubits("a", "b", "c")
    state = _random_pure(layout, rng)
    u = Unitary(layout.select(["b", "c"]), unitary_group.rvs(4, random_state=rng))
    after = apply_unitary(state, u)
    norm = float(np.linalg.norm(after.vector))
    return _close(norm, 1.0, settings.NORM_TOLERANCE), f"norm {norm:.12f}"


def _partial_trace_of_product(rng):
    left = _random_pure(RegisterLayout.qubits("a"), rng)
    right = _random_pure(RegisterLayout.qubits("b"), rng)
    reduced = partial_trace(tensor(left, right), ["b"])
    distance = trace_distance(reduced, left.as_mixed())
    return distance <= settings.LEMMA_SLACK, f"distance {distance:.3e}"


def _born_sums_to_one(rng):
    layout = RegisterLayout.of(("a", 3), ("b", 2))
    state = _random_pure(layout, rng)
    total = sum(p for _, p in born_probabilities(state, ProjectiveMeasurement.computational(layout, "a")))
    return _close(total, 1.0), f"total {total:.12f}"


def _measurement_is_repeatable(rng):
    layout = RegisterLayout.qubits("a", "b")
    pvm = ProjectiveMeasurement.computational(layout, "a")
    label, post = measure_projective(_random_pure(layout, rng), pvm, rng)
    again = dict(born_probabilities(post, pvm)).get(label, 0.0)
    return _close(again, 1.0), f"repeat probability {again:.12f}"


def _pure_and_mixed_distance_agree(rng):
    layout = RegisterLayout.qubits("a", "b")
    a, b = _random_pure(layout, rng), _random_pure(layout, rng)
    pure = trace_distance(a, b)
    mixed = trace_distance(a.as_mixed(), b.as_mixed())
    return _close(pure, mixed, 1e-8), f"pure {pure:.9f}, mixed {mixed:.9f}"


# measure

def _valest_mean_matches_trace(rng):
    layout = RegisterLayout.qubits("a", "b")
    m = ValueMeasurement.from_operator(_random_operator(layout, rng), layout, 0.05, 0.01)
    state = _random_pure(layout, rng)
    mean = sum(v * p for v, p in outcome_distribution(m, state))
    target = valest_exact(m, state)
    return abs(mean - target) <= m.spacing / 2 + settings.LEMMA_SLACK, f"E[p*] {mean:.6f}, Tr(Mρ) {target:.6f}"


def _valest_is_projective(rng):
    layout = RegisterLayout.qubits("a", "b")
    m = ValueMeasurement.from_operator(_random_operator(layout, rng), layout, 0.1, 0.05)
    first = valest(m, _random_pure(layout, rng), rng)
    second = valest(m, first.post_state, rng)
    return first.value == second.value, f"{first.value:.4f} then {second.value:.4f}"


def _repair_on_unmoved_state(rng):
    layout = RegisterLayout.qubits("a")
    m = ValueMeasurement.from_operator(np.diag([0.2, 0.8]).astype(complex), layout, 0.1, 0.05)
    state = QuantumState.basis(layout, 1)
    pvm = ProjectiveMeasurement.computational(layout)
    result = repair_detailed(m, pvm, state, 1, 0.8, 0.5, rng)
    return result.converged and result.rounds == 0, f"rounds {result.rounds}, value {result.final_value:.4f}"


# memoryless

def _prepare_value_is_stable(rng):
    m_family, p_family, state, fp = adversarial_memory_instance()
    fp = replace(fp, T_override=4)
    result = prepare(m_family, p_family, state, fp, rng)
    again = valest(m_family.at(fp.inner_epsilon, fp.inner_delta), result.state, rng)
    return again.value == result.value, f"p′ {result.value:.6f}, re-measured {again.value:.6f}"


def _folded_matches_paths(rng):
    m_family, p_family, state, fp = adversarial_memory_instance()
    fp = replace(fp, T_override=2)
    folded = forgetfulness_distance(m_family, p_family, state, fp).distance
    paths = enumerate_paths(m_family, p_family, state, fp)
    return _close(folded, paths, 1e-8), f"folded {folded:.9f}, paths {paths:.9f}"


def _forgetfulness_within_bound(rng):
    result = forgetfulness_distance(*adversarial_memory_instance(), rng=rng)
    return result.passed, f"distance {result.distance:.6f}, bound {result.bound:.4f}"


# protocols

def _subset_passive_success(rng):
    value = exact_success(passive_prover(subset(4, 3), 1), subset(4, 3))
    return _close(value, 0.75), f"success {value:.9f}"


def _rotation_success(rng):
    theta = pi / 8
    value = exact_success(rotation_prover(theta), parity(2))
    return _close(value, cos(theta) ** 2, 1e-9), f"success {value:.9f}"


def _product_success_is_power(rng):
    theta = pi / 6
    protocol = repeat(parity(2), 3, 3)
    value = exact_success(product_prover(rotation_prover(theta), 3), protocol)
    return _close(value, cos(theta) ** 6, 1e-9), f"success {value:.9f}"


def _preimage_optimum(rng):
    value = optimal_success(preimage(4, 2))
    return _close(value, 0.5), f"optimum {value:.9f}"


def _bad_correlations_law(rng):
    k, delta = 2, 0.5
    protocol = repeat(programmable(4), k, k)
    value = exact_success(bad_correlations_prover(k, delta, n=4), protocol)
    target = BadCorrelationsLaw(k, delta).probabilities[0]
    return _close(value, target, 1.0 / 4 ** k), f"all-accept {value:.6f}, law {target:.6f}"


# reductions

def _always_accept_completes(rng):
    protocol = repeat(always_accept(2), 2, 2)
    prover = passive_prover(protocol)
    params = ReductionParams(kind="public-coin", mode="desk", xi=1.0, k=2, t=2, m=2, iterations=2,
                             epsilon0=0.5, epsilon=0.25, delta=0.25, eta=0.5, flooding_T=2)
    record = run_public_coin_reduction(prover, protocol, params, open_session(protocol.base, rng),
                                       prover.copies(2), rng)
    return record.completed and record.external_verdict == 1, f"abort {record.abort_cause}"


def _deferred_measurement(rng):
    protocol = repeat(parity(2), 2, 1)
    prover = product_prover(rotation_prover(pi / 5), 2)
    result = deferred_measurement_check(prover, protocol, prover.initial_state, (), (0, 1), 1, 0.1, 0.05)
    return result.passed, f"TV {result.distance:.3e}"


def _soft_decision_half(rng):
    value = acceptance_probability(1.0, 3, 1)
    return _close(value, 0.5), f"probability {value}"


def _bounds_decrease_in_k(rng):
    increases = increases_in_k(0.1, [10, 100, 1000, 10_000, 100_000], [0.5, 0.75, 1.0], m=2)
    return not increases, f"increases {increases}" if increases else "non-increasing"


SUITES: Dict[str, Sequence[Tuple[str, Check]]] = {
    "hilbert": (
        ("unitary keeps the norm", _unitary_keeps_norm),
        ("partial trace of a product state", _partial_trace_of_product),
        ("Born probabilities sum to one", _born_sums_to_one),
        ("projective measurement is repeatable", _measurement_is_repeatable),
        ("pure and mixed trace distance agree", _pure_and_mixed_distance_agree),
    ),
    "measure": (
        ("mean value matches Tr(Mρ)", _valest_mean_matches_trace),
        ("value measurement is projective", _valest_is_projective),
        ("repair leaves an unmoved state", _repair_on_unmoved_state),
    ),
    "memoryless": (
        ("prepare value is stable", _prepare_value_is_stable),
        ("folded and path enumeration agree", _folded_matches_paths),
        ("forgetfulness within N·η", _forgetfulness_within_bound),
    ),
    "protocols": (
        ("passive prover on the subset game", _subset_passive_success),
        ("rotation prover succeeds with cos²θ", _rotation_success),
        ("product prover success is a power", _product_success_is_power),
        ("preimage optimum is w/n", _preimage_optimum),
        ("bad-correlations all-accept mass", _bad_correlations_law),
    ),
    "reductions": (
        ("always-accept reduction completes", _always_accept_completes),
        ("deferred measurement orderings agree", _deferred_measurement),
        ("soft decision at level t-2 is 2^-ν", _soft_decision_half),
    ),
    "harness": (
        ("corollary bounds do not grow with k", _bounds_decrease_in_k),
    ),
}


def run_properties(seed: int, packages: Optional[Sequence[str]] = None) -> List[PropertyResult]:
    """
    Run the property suites.

    Args:
        seed: Master seed; every check gets its own stream
        packages: Packages to check (all by default)

    Returns:
        One PropertyResult per check
    """
    results = []
    for package in packages or SUITES:
        offset = list(SUITES).index(package)
        for index, (name, check) in enumerate(SUITES[package]):
            try:
                passed, detail = check(make_rng(seed, offset, index))
            except Exception as exc:  # a crashing check is a failing check
                logger.exception("Property %s/%s raised", package, name)
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(PropertyResult(package, name, bool(passed), detail))
    return results
