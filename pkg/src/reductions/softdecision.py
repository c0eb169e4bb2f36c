"""
SoftDecision and its coherent projection SoftDecisionProj.
"""
import logging
from typing import Dict, Hashable, Sequence, Tuple

import numpy as np

from hilbert import Projector, ProjectiveMeasurement, QuantumState, measure_projective
from memoryless import ProjectionFamily
from protocols import ProverStrategy, RepeatedProtocol
from utils.errors import ParameterError, ProtocolError

logger = logging.getLogger(__name__)

OMEGA_BITS = 53
OMEGA_SPACE = 1 << OMEGA_BITS
DECISIONS = ("soft", "hard")


def acceptance_probability(nu: float, t: int, level: int) -> float:
    """``min{1, 2^{ν(ℓ+1−t)}}``."""
    return min(1.0, 2.0 ** (nu * (level + 1 - t)))


def _cutoff(nu: float, t: int, level: int, k: int, decision: str) -> int:
    """Number of ω values in ``[0, 2^53)`` that accept at sibling level ``level``."""
    if decision == "hard":
        return OMEGA_SPACE if level == k - 1 else 0
    return int(acceptance_probability(nu, t, level) * OMEGA_SPACE)


def complete_randomness(r_minus_j: Sequence[Hashable], j: int, r_j: Hashable = None) -> Tuple[Hashable, ...]:
    """Insert coordinate ``j`` into the ``k−1`` sibling coordinates."""
    r_minus_j = tuple(r_minus_j)
    return r_minus_j[:j] + (r_j,) + r_minus_j[j:]


def sibling_level(protocol: RepeatedProtocol, j: int, r_minus_j: Sequence[Hashable],
                  tau: Tuple[Tuple, Tuple, Tuple]) -> int:
    """``Σ_{j′≠j} Accept_{j′}(r̄^{(−j)}, τ)``."""
    z1, q, z2 = tau
    k = protocol.k
    if len(r_minus_j) != k - 1:
        raise ProtocolError(f"r^(-j) has {len(r_minus_j)} coordinates, expected {k - 1}")
    if not (len(z1) == len(q) == len(z2) == k):
        raise ProtocolError(f"Transcript width does not match k={k}")
    r = complete_randomness(r_minus_j, j)
    return sum(
        protocol.base.accept(r[c], (z1[c], q[c], z2[c])) for c in range(k) if c != j
    )


def softdecision(protocol: RepeatedProtocol, nu: float, t: int, j: int, r_minus_j: Sequence[Hashable],
                 tau: Tuple[Tuple, Tuple, Tuple], omega: int, decision: str = "soft") -> int:
    """
    ``SoftDecision_{ν,t}(j, r̄^{(−j)}, τ, ω)``.

    Over uniform ``ω ∈ [0, 2^53)`` it returns 1 with probability
    ``min{1, 2^{ν(ℓ+1−t)}}`` (to within ``2^{-53}``), where ``ℓ`` counts the
    accepting siblings of ``j``. The hard variant accepts only when all
    ``k − 1`` siblings accept.

    Args:
        protocol: Repeated three-message protocol
        nu: Smoothness ν ≥ 0
        t: Threshold
        j: Decision coordinate
        r_minus_j: Verifier randomness of the other ``k − 1`` coordinates
        tau: ``(z̄₁, q̄, z̄₂)``
        omega: Coin string as an integer
        decision: ``"soft"`` or ``"hard"``

    Returns:
        The decision bit
    """
    if decision not in DECISIONS:
        raise ParameterError(f"decision must be one of {DECISIONS}, got {decision!r}")
    if not 0 <= omega < OMEGA_SPACE:
        raise ParameterError(f"omega must be a {OMEGA_BITS}-bit integer")
    level = sibling_level(protocol, j, r_minus_j, tau)
    return int(omega < _cutoff(nu, t, level, protocol.k, decision))


def sample_omega(rng: np.random.Generator) -> int:
    return int(rng.integers(OMEGA_SPACE))


class SoftDecisionProjections:
    """
    Builds ``SoftDecisionProj_{z̄₁,j,r̄^{(−j)},q,ω}`` as the binary measurement
    ``{1: U_q̄† D U_q̄, 0: I − U_q̄† D U_q̄}`` with ``D`` diagonal over ``𝓩₂``.
    """

    def __init__(self, prover: ProverStrategy, protocol: RepeatedProtocol, z1bar: Sequence[int],
                 nu: float, t: int, decision: str = "soft"):
        if protocol.kind != "three-message":
            raise ProtocolError("SoftDecision is defined for three-message protocols")
        if decision not in DECISIONS:
            raise ParameterError(f"decision must be one of {DECISIONS}, got {decision!r}")
        self.prover = prover
        self.protocol = protocol
        self.z1bar = tuple(z1bar)
        self.nu = float(nu)
        self.t = int(t)
        self.decision = decision
        layout = prover.layout
        positions = [layout.index(name) for name in prover.responses[0]]
        digits = np.unravel_index(np.arange(layout.total_dim), layout.dims)
        self._z2_table = np.stack([digits[p] for p in positions], axis=1)
        self._cache: Dict[Tuple, ProjectiveMeasurement] = {}

    def query(self, j: int, r_minus_j: Sequence[Hashable], q: Hashable) -> Tuple[Hashable, ...]:
        """``q̄`` with coordinate ``j`` set to ``q`` and the others computed from ``r̄^{(−j)}``."""
        r = complete_randomness(r_minus_j, j)
        return tuple(
            q if c == j else self.protocol.base.query_of(r[c], self.z1bar[c])
            for c in range(self.protocol.k)
        )

    def accepted_levels(self, omega: int) -> Tuple[int, ...]:
        k = self.protocol.k
        return tuple(
            level for level in range(k)
            if omega < _cutoff(self.nu, self.t, level, k, self.decision)
        )

    def measurement(self, j: int, r_minus_j: Sequence[Hashable], q: Hashable,
                    omega: int) -> ProjectiveMeasurement:
        """The binary measurement with outcome labels 1 and 0."""
        r_minus_j = tuple(r_minus_j)
        levels = self.accepted_levels(omega)
        key = (j, r_minus_j, q, levels)
        if key not in self._cache:
            qbar = self.query(j, r_minus_j, q)
            r = complete_randomness(r_minus_j, j)
            base = self.protocol.base
            verdicts = {}
            mask = np.empty(len(self._z2_table))
            for index, row in enumerate(self._z2_table):
                z2 = tuple(int(v) for v in row)
                if z2 not in verdicts:
                    level = sum(
                        base.accept(r[c], (self.z1bar[c], qbar[c], z2[c]))
                        for c in range(self.protocol.k) if c != j
                    )
                    verdicts[z2] = 1.0 if level in levels else 0.0
                mask[index] = verdicts[z2]
            u = self.prover.unitary_matrix(1, qbar)
            accept = np.diag(mask).astype(complex) if u is None else (u.conj().T * mask) @ u
            accept = (accept + accept.conj().T) / 2
            proj = Projector(self.prover.layout, accept)
            self._cache[key] = ProjectiveMeasurement(((1, proj), (0, proj.complement())))
        return self._cache[key]

    def family(self) -> ProjectionFamily:
        """``P`` over uniform ``j``, ``r̄^{(−j)}``, ``q`` from the query law, and ``ω``."""
        k = self.protocol.k
        space = self.protocol.base.randomness_space

        def draw(rng):
            return space[int(rng.integers(len(space)))]

        def sampler(rng: np.random.Generator):
            j = int(rng.integers(k))
            r_minus_j = tuple(draw(rng) for _ in range(k - 1))
            q = self.protocol.base.query_of(draw(rng), self.z1bar[j])
            omega = sample_omega(rng)
            return (j, r_minus_j, q, omega), self.measurement(j, r_minus_j, q, omega)

        return ProjectionFamily((1, 0), sampler=sampler, name=f"softdecision[{self.decision}]")


def softdecision_proj(projections: SoftDecisionProjections, j: int, r_minus_j: Sequence[Hashable],
                      q: Hashable, omega: int, state: QuantumState,
                      rng: np.random.Generator) -> Tuple[QuantumState, int]:
    """
    Apply ``SoftDecisionProj``: ``U_q̄``, coherent SoftDecision over ``𝓩₂``,
    measure the decision bit, ``U_q̄†``.

    Returns:
        (post-measurement state, b)
    """
    if len(tuple(r_minus_j)) != projections.protocol.k - 1:
        raise ProtocolError("r^(-j) width does not match k - 1")
    b, post = measure_projective(state, projections.measurement(j, r_minus_j, q, omega), rng)
    logger.debug("SoftDecisionProj j=%d q=%r -> b=%d", j, q, b)
    return post, int(b)
