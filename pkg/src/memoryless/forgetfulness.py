"""
Forgetfulness of Repair′: how much the repaired state remembers which
measurement disturbed it.

The exact evaluators propagate unnormalized density operators through every
measurement outcome. The folded evaluator sums branches whose future behaviour
no longer depends on their classical history (the procedures are linear in the
state), which keeps the work polynomial in ``T``. ``enumerate_paths`` keeps
every classical outcome path separate and is only usable for small ``T``.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

from config import settings
from hilbert import (
    Projector,
    ProjectiveMeasurement,
    QuantumState,
    RegisterLayout,
    ensemble_from_blocks,
    measure_projective,
    operator_on,
    trace_distance,
)
from measure import ValueMeasurement, ValueMeasurementFamily, repair_budget, valest, within_tolerance
from memoryless.family import ProjectionFamily
from memoryless.flooding import prepare, repair_prime
from memoryless.params import FloodingParams
from utils.errors import DimensionError, IntractableInstanceError
from utils.rng import make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForgetfulnessResult:
    """Trace distance between the actual-Π and fresh-Π′ ensembles."""

    distance: float
    bound: float
    method: str
    interval: Optional[Tuple[float, float]] = None
    work: int = 0

    @property
    def passed(self) -> bool:
        upper = self.interval[1] if self.interval is not None else self.distance
        return upper <= self.bound + settings.LEMMA_SLACK

    def __float__(self) -> float:
        return self.distance

    def to_record(self) -> dict:
        return {
            "distance": self.distance,
            "bound": self.bound,
            "method": self.method,
            "interval": list(self.interval) if self.interval is not None else None,
            "work": self.work,
            "passed": self.passed,
        }


class _Propagator:
    """Branch propagation of unnormalized density operators."""

    def __init__(self, m_prime: ValueMeasurement, members: Sequence[ProjectiveMeasurement],
                 fp: FloodingParams, layout: RegisterLayout, fold: bool):
        self.blocks = [(block.value, block.basis @ block.basis.conj().T) for block in m_prime.blocks]
        self.epsilon = m_prime.epsilon
        self.lifted = [
            [operator_on(layout, pvm.layout.names, proj.matrix) for _, proj in pvm.outcomes]
            for pvm in members
        ]
        self.identity = np.eye(layout.total_dim, dtype=complex)
        self.budget = repair_budget(fp.inner_eta)
        self.T = fp.T
        self.fold = fold
        self.work = 0

    @staticmethod
    def keep(piece: np.ndarray) -> bool:
        return float(np.trace(piece).real) > settings.PRUNE_PROBABILITY

    def collect(self, pieces: List[np.ndarray]) -> List[np.ndarray]:
        self.work += len(pieces)
        if not self.fold and self.work > settings.MAX_BRANCHES:
            raise IntractableInstanceError(f"Path enumeration exceeded {settings.MAX_BRANCHES} branches")
        if self.fold and len(pieces) > 1:
            return [sum(pieces[1:], pieces[0])]
        return pieces

    def value_branches(self, rho: np.ndarray, blocks=None) -> List[Tuple[float, np.ndarray]]:
        out = []
        for value, proj in (self.blocks if blocks is None else blocks):
            piece = proj @ rho @ proj
            if self.keep(piece):
                out.append((value, piece))
        return out

    def pinch(self, rhos: List[np.ndarray], blocks=None) -> List[np.ndarray]:
        return self.collect([piece for rho in rhos for _, piece in self.value_branches(rho, blocks)])

    def repair(self, rhos: List[np.ndarray], proj: np.ndarray, target: float) -> List[np.ndarray]:
        complement = self.identity - proj
        done: List[np.ndarray] = []
        active = list(rhos)
        for rounds in range(self.budget + 1):
            pending = []
            for rho in active:
                for value, piece in self.value_branches(rho):
                    if rounds == self.budget or within_tolerance(value, target, self.epsilon):
                        done.append(piece)
                    else:
                        pending.append(piece)
            if not pending:
                break
            nxt = []
            for rho in pending:
                for op in (proj, complement):
                    piece = op @ rho @ op
                    if self.keep(piece):
                        nxt.append(piece)
            active = self.collect(nxt)
        return self.collect(done)

    def flood(self, rhos: List[np.ndarray]) -> List[np.ndarray]:
        weight = 1.0 / len(self.lifted)
        out = []
        for rho in rhos:
            for value, piece in self.value_branches(rho):
                for projectors in self.lifted:
                    for proj in projectors:
                        sigma = weight * (proj @ piece @ proj)
                        if self.keep(sigma):
                            out.extend(self.repair([sigma], proj, value))
        return self.collect(out)

    def repaired_states(self, rho: np.ndarray, initial_blocks) -> List[np.ndarray]:
        """``σ*_Π`` for every member ``Π`` (normalized)."""
        current = self.pinch([rho], initial_blocks)
        prepared: Dict[float, List[np.ndarray]] = {}
        for t in range(1, self.T + 1):
            for state in current:
                for value, piece in self.value_branches(state):
                    prepared.setdefault(value, []).append(piece / self.T)
            if t < self.T:
                current = self.flood(current)
        prepared = {value: self.collect(pieces) for value, pieces in prepared.items()}

        results = []
        for projectors in self.lifted:
            after = []
            for value, pieces in prepared.items():
                for proj in projectors:
                    disturbed = [proj @ piece @ proj for piece in pieces]
                    disturbed = [piece for piece in disturbed if self.keep(piece)]
                    if disturbed:
                        after.extend(self.repair(disturbed, proj, value))
            after = self.collect(after)
            for _ in range(self.T):
                after = self.flood(after)
            final = self.pinch(after)
            sigma = sum(final[1:], final[0])
            results.append(sigma / np.trace(sigma).real)
        return results


def ensemble_distance(layout: RegisterLayout, sigmas: Sequence[np.ndarray]) -> float:
    """TD between ``(Π, σ*_Π)`` and ``(Π′, σ*_Π)`` for uniform ``Π, Π′`` over the given states."""
    weight = 1.0 / len(sigmas)
    average = sum(sigmas) * weight
    actual = ensemble_from_blocks(layout, {a: weight * s for a, s in enumerate(sigmas)})
    fresh = ensemble_from_blocks(layout, {a: weight * average for a in range(len(sigmas))})
    return trace_distance(actual, fresh)


def _exact(m_family: ValueMeasurementFamily, p_family: ProjectionFamily, state: QuantumState,
           fp: FloodingParams, fold: bool) -> Tuple[float, int]:
    if state.dim > settings.MAX_MIXED_DIM:
        raise DimensionError(f"Exact evaluation needs dim ≤ {settings.MAX_MIXED_DIM}")
    m_prime = m_family.at(fp.inner_epsilon, fp.inner_delta)
    m_outer = m_family.at(fp.epsilon, fp.delta)
    propagator = _Propagator(m_prime, p_family.members, fp, state.layout, fold)
    initial_blocks = [(block.value, block.basis @ block.basis.conj().T) for block in m_outer.blocks]
    sigmas = propagator.repaired_states(np.array(state.density()), initial_blocks)
    return ensemble_distance(state.layout, sigmas), propagator.work


def enumerate_paths(m_family: ValueMeasurementFamily, p_family: ProjectionFamily,
                    state: QuantumState, fp: FloodingParams) -> float:
    """
    Forgetfulness distance by enumerating every classical outcome path.

    Branches below the pruning probability are dropped; the enumeration raises
    ``IntractableInstanceError`` beyond the branch limit.
    """
    distance, _ = _exact(m_family, p_family, state, fp, fold=False)
    return distance


def _run_chain(m_family: ValueMeasurementFamily, p_family: ProjectionFamily,
               member: ProjectiveMeasurement, state: QuantumState, fp: FloodingParams,
               rng: np.random.Generator) -> QuantumState:
    measured = valest(m_family.at(fp.epsilon, fp.delta), state, rng)
    prepared = prepare(m_family, p_family, measured.post_state, fp, rng)
    y, sigma = measure_projective(prepared.state, member, rng)
    return repair_prime(m_family, p_family, member, sigma, y, prepared.value, fp, rng).state


def _sampled(m_family: ValueMeasurementFamily, p_family: ProjectionFamily, state: QuantumState,
             fp: FloodingParams, rng: np.random.Generator, trajectories: int) -> ForgetfulnessResult:
    if p_family.is_enumerable and len(p_family) <= settings.MAX_ENUMERATED_FAMILY:
        members = list(p_family.members)
    else:
        members = [p_family.sample(rng)[1] for _ in range(settings.MAX_ENUMERATED_FAMILY)]
    estimates = []
    for _ in range(settings.SAMPLING_BATCHES):
        sigmas = []
        for member in members:
            acc = np.zeros((state.dim, state.dim), dtype=complex)
            for _ in range(trajectories):
                acc += _run_chain(m_family, p_family, member, state, fp, rng).density()
            sigmas.append(acc / trajectories)
        estimates.append(ensemble_distance(state.layout, sigmas))
    estimates = np.array(estimates)
    mean = float(estimates.mean())
    half = settings.WILSON_Z * float(estimates.std(ddof=1)) / np.sqrt(len(estimates))
    logger.info("Sampled forgetfulness distance %.6f ± %.6f", mean, half)
    return ForgetfulnessResult(mean, p_family.N * fp.eta, "sampled",
                               (max(0.0, mean - half), min(1.0, mean + half)),
                               work=len(estimates) * len(members) * trajectories)


def forgetfulness_distance(m_family: ValueMeasurementFamily, p_family: ProjectionFamily,
                           state: QuantumState, fp: FloodingParams,
                           rng: Optional[np.random.Generator] = None, method: str = "folded",
                           trajectories: int = 25) -> ForgetfulnessResult:
    """
    Distance between ``(Π, σ*_Π)`` and ``(Π′, σ*_Π)`` for ``Π, Π′ ← 𝓟``.

    Args:
        m_family: Value measurement family ``M``
        p_family: Projection family ``𝓟``
        state: Initial state ``ρ``
        fp: Flooding parameters
        rng: Stream for the sampling fallback
        method: ``"folded"`` or ``"paths"`` for the exact evaluators
        trajectories: Runs per member and batch in the sampling fallback

    Returns:
        ForgetfulnessResult with the bound ``N·η``; sampled results carry an interval
    """
    bound = p_family.N * fp.eta
    exact_possible = (p_family.is_enumerable and len(p_family) <= settings.MAX_ENUMERATED_FAMILY
                      and state.dim <= settings.MAX_MIXED_DIM)
    if exact_possible:
        try:
            distance, work = _exact(m_family, p_family, state, fp, fold=(method != "paths"))
            return ForgetfulnessResult(distance, bound, method, work=work)
        except IntractableInstanceError as exc:
            logger.warning("Exact enumeration abandoned (%s); sampling instead", exc)
    rng = rng if rng is not None else make_rng(settings.DEFAULT_SEED)
    return _sampled(m_family, p_family, state, fp, rng, trajectories)


def _basis_measurement(layout: RegisterLayout, basis: np.ndarray) -> ProjectiveMeasurement:
    return ProjectiveMeasurement.from_pairs(
        (label, Projector.from_basis(layout, basis[:, [label]])) for label in range(basis.shape[1])
    )


def adversarial_memory_instance(eta: float = 0.5, epsilon: float = 0.1, delta: float = 0.05,
                                angle: float = np.pi / 16
                                ) -> Tuple[ValueMeasurementFamily, ProjectionFamily, QuantumState, FloodingParams]:
    """
    Two-qubit instance whose memory qubit records the basis of the last measurement.

    The family measures the memory qubit either in the computational basis or
    in a basis rotated by ``angle``; the value operator acts on the other qubit
    only, so repairs never disturb the record.
    """
    layout = RegisterLayout.qubits("memory", "value")
    qubit = RegisterLayout.qubits("memory")
    c, s = np.cos(angle), np.sin(angle)
    rotated = np.array([[c, -s], [s, c]], dtype=complex)
    family = ProjectionFamily.of(
        [_basis_measurement(qubit, np.eye(2, dtype=complex)), _basis_measurement(qubit, rotated)],
        name="memory-bases",
    )
    operator = operator_on(layout, ["value"], np.diag([0.25, 0.75]))
    amplitudes = np.kron([1.0, 0.0], [np.sqrt(0.5), np.sqrt(0.5)])
    state = QuantumState.pure(layout, amplitudes)
    return (ValueMeasurementFamily(operator, layout), family, state,
            FloodingParams(epsilon, delta, eta, ell=2))


def random_instance(rng: np.random.Generator, eta: float = 0.5, epsilon: float = 0.1,
                    delta: float = 0.05, members: int = 2
                    ) -> Tuple[ValueMeasurementFamily, ProjectionFamily, QuantumState, FloodingParams]:
    """Random two-qubit operator, random single-qubit bases and a random pure state."""
    layout = RegisterLayout.qubits("a", "b")
    qubit = RegisterLayout.qubits("a")
    u = unitary_group.rvs(4, random_state=rng)
    operator = u @ np.diag(rng.uniform(0.0, 1.0, size=4)) @ u.conj().T
    family = ProjectionFamily.of(
        [_basis_measurement(qubit, unitary_group.rvs(2, random_state=rng)) for _ in range(members)],
        name="random-bases",
    )
    vec = rng.normal(size=4) + 1j * rng.normal(size=4)
    state = QuantumState.pure(layout, vec / np.linalg.norm(vec))
    return (ValueMeasurementFamily(operator, layout), family, state,
            FloodingParams(epsilon, delta, eta, ell=2))
