"""
Quantum prover strategies given as explicit per-query unitaries.
"""
import logging
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import accumulate
from math import ceil
from typing import Callable, Dict, Hashable, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

from hilbert import QuantumState, RegisterLayout, Unitary, tensor
from utils.errors import LayoutError, ParameterError, ProtocolError

logger = logging.getLogger(__name__)

RoundUnitary = Callable[[Tuple[Hashable, ...]], Optional[Unitary]]


def response_register(round_index: int, coordinate: int) -> str:
    """Name of the response register for round ``round_index`` (1-based) of coordinate ``coordinate``."""
    return f"Z{round_index}_{coordinate}"


def internal_register(coordinate: int) -> str:
    return f"I_{coordinate}"


@dataclass(frozen=True)
class ProverStrategy:
    """
    Prover state ``|ψ⟩`` plus one query-indexed unitary family per verifier query.

    ``round_unitaries[ℓ-1](q̄)`` returns ``U_ℓ(q̄)`` on a subset of the layout
    (``None`` for the identity). After it is applied, the registers in
    ``responses[ℓ-1]`` (one per coordinate) are measured in the computational
    basis. Three-message provers additionally measure ``first_message`` on the
    initial state; they have a single query round.
    """

    initial_state: QuantumState
    round_unitaries: Tuple[RoundUnitary, ...]
    responses: Tuple[Tuple[str, ...], ...]
    first_message: Tuple[str, ...] = ()
    name: str = "prover"
    _cache: Dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        responses = tuple(tuple(names) for names in self.responses)
        if len(responses) != len(self.round_unitaries):
            raise ProtocolError("One response register tuple per query round is required")
        if not responses:
            raise ProtocolError("A prover needs at least one query round")
        widths = {len(names) for names in responses}
        if self.first_message:
            widths.add(len(self.first_message))
        if len(widths) != 1:
            raise ProtocolError(f"Response registers disagree on the repetition width: {widths}")
        used = [name for names in responses for name in names] + list(self.first_message)
        if not self.layout.contains(used):
            raise LayoutError(f"Response registers {used} are not all in {self.layout.names}")
        if len(set(used)) != len(used):
            raise LayoutError("Response registers must be distinct across rounds")
        object.__setattr__(self, "responses", responses)
        object.__setattr__(self, "round_unitaries", tuple(self.round_unitaries))
        object.__setattr__(self, "first_message", tuple(self.first_message))

    @property
    def layout(self) -> RegisterLayout:
        return self.initial_state.layout

    @property
    def k(self) -> int:
        return len(self.responses[0])

    @property
    def rounds(self) -> int:
        return len(self.responses)

    @property
    def num_qubits(self) -> float:
        """The qubit count Λ = log₂ of the total dimension."""
        return self.layout.num_qubits

    @property
    def flooding_ell(self) -> int:
        """Memory bound in qubits used to size flooding."""
        return max(1, ceil(self.num_qubits - 1e-9))

    def response_dims(self, ell: int) -> Tuple[int, ...]:
        return tuple(self.layout.dim(name) for name in self.responses[ell - 1])

    def unitary(self, ell: int, qbar: Sequence[Hashable]) -> Optional[Unitary]:
        """``U_ℓ(q̄)`` on its own registers, or ``None`` for the identity."""
        if not 1 <= ell <= self.rounds:
            raise ProtocolError(f"Round {ell} out of range 1..{self.rounds}")
        qbar = tuple(qbar)
        if len(qbar) != self.k:
            raise ProtocolError(f"Query width {len(qbar)} does not match prover width {self.k}")
        u = self.round_unitaries[ell - 1](qbar)
        if u is None:
            return None
        frozen = set(self.first_message)
        for names in self.responses[:ell - 1]:
            frozen.update(names)
        touched = frozen & set(u.layout.names)
        if touched:
            raise ProtocolError(f"Round {ell} unitary acts on already measured registers {sorted(touched)}")
        return u

    def unitary_matrix(self, ell: int, qbar: Sequence[Hashable]) -> Optional[np.ndarray]:
        """Full-layout matrix of ``U_ℓ(q̄)``, cached per query."""
        key = (ell, tuple(qbar))
        if key not in self._cache:
            u = self.unitary(ell, qbar)
            self._cache[key] = None if u is None else u.on(self.layout)
        return self._cache[key]

    def copies(self, count: int) -> Tuple[QuantumState, ...]:
        """``count`` fresh copies of the initial state."""
        return (self.initial_state,) * int(count)


def shift_unitary(register: str, dim: int, amount: int) -> Optional[Unitary]:
    """Cyclic shift ``|j⟩ → |j + amount mod dim⟩`` on one register."""
    amount = int(amount) % dim
    if amount == 0:
        return None
    layout = RegisterLayout.of((register, dim))
    return Unitary.permutation(layout, [(j + amount) % dim for j in range(dim)])


def xor_unitary(registers: Sequence[str], bits: Sequence[int]) -> Optional[Unitary]:
    """Flip the qubit registers whose entry in ``bits`` is set."""
    if not any(bits):
        return None
    layout = RegisterLayout.qubits(*registers)
    mask = 0
    for bit in bits:
        mask = (mask << 1) | int(bool(bit))
    return Unitary.permutation(layout, [j ^ mask for j in range(layout.total_dim)])


def passive_prover(protocol, k: Optional[int] = None) -> ProverStrategy:
    """
    Prover that never touches its registers and always answers 0.

    Args:
        protocol: Base or repeated protocol fixing the response dimensions
        k: Repetition width (defaults to the protocol's own width)

    Returns:
        A strategy over ``|0…0⟩``
    """
    base = getattr(protocol, "base", protocol)
    k = int(k if k is not None else getattr(protocol, "k", 1))
    registers = []
    if base.kind == "public-coin":
        responses = tuple(
            tuple(response_register(ell, c) for c in range(k)) for ell in range(1, base.m + 1)
        )
        for c in range(k):
            for ell in range(1, base.m + 1):
                registers.append((response_register(ell, c), base.response_dims[ell - 1]))
        first = ()
    else:
        responses = (tuple(response_register(2, c) for c in range(k)),)
        first = tuple(response_register(1, c) for c in range(k))
        for c in range(k):
            registers.append((response_register(1, c), base.first_dim))
            registers.append((response_register(2, c), base.second_dim))
    layout = RegisterLayout.of(*registers)
    unitaries = tuple((lambda qbar: None) for _ in responses)
    return ProverStrategy(QuantumState.basis(layout), unitaries, responses, first, name="passive")


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotation_prover(theta: float) -> ProverStrategy:
    """
    Single-fold prover for the parity game answering correctly with probability ``cos²θ``.

    For an even query it applies ``R(θ)`` to ``|0⟩``; for an odd one ``X·R(θ)``.
    """
    layout = RegisterLayout.qubits(response_register(1, 0))
    even = Unitary(layout, _rotation(theta))
    odd = Unitary(layout, np.array([[0, 1], [1, 0]], dtype=complex) @ _rotation(theta))

    def round_one(qbar):
        return even if int(qbar[0]) % 2 == 0 else odd

    return ProverStrategy(
        QuantumState.basis(layout),
        (round_one,),
        ((response_register(1, 0),),),
        name=f"rotation({theta:.4f})",
    )


def _renamed(name: str, coordinate: int) -> str:
    stem, _, _ = name.rpartition("_")
    return f"{stem}_{coordinate}"


def _rename_layout(layout: RegisterLayout, coordinate: int) -> RegisterLayout:
    return RegisterLayout.of(*[(_renamed(name, coordinate), dim) for name, dim in layout.registers])


def product_prover(single: ProverStrategy, k: int) -> ProverStrategy:
    """
    ``k`` independent copies of a single-fold prover, one per coordinate.

    Register names ending in ``_0`` are renamed to ``_c`` for coordinate ``c``.
    """
    if single.k != 1:
        raise ProtocolError("product_prover expects a single-fold prover")
    if k < 1:
        raise ParameterError(f"k must be positive, got {k}")
    state = None
    for c in range(k):
        renamed = QuantumState(
            _rename_layout(single.layout, c),
            vector=single.initial_state.vector,
            matrix=single.initial_state.matrix,
        )
        state = renamed if state is None else tensor(state, renamed)

    def lift(ell):
        def round_unitary(qbar):
            layouts, matrices = [], []
            for c in range(k):
                u = single.unitary(ell, (qbar[c],))
                if u is not None:
                    layouts.append(_rename_layout(u.layout, c))
                    matrices.append(u.matrix)
            if not matrices:
                return None
            layout = layouts[0]
            matrix = matrices[0]
            for other_layout, other in zip(layouts[1:], matrices[1:]):
                layout = layout.concat(other_layout)
                matrix = np.kron(matrix, other)
            return Unitary(layout, matrix)
        return round_unitary

    responses = tuple(
        tuple(_renamed(names[0], c) for c in range(k)) for names in single.responses
    )
    first = tuple(_renamed(single.first_message[0], c) for c in range(k)) if single.first_message else ()
    return ProverStrategy(
        state,
        tuple(lift(ell) for ell in range(1, single.rounds + 1)),
        responses,
        first,
        name=f"{single.name}^{k}",
    )


class BadCorrelationsLaw:
    """
    Joint verdict law where all ``k`` executions accept with probability ``δ^k``
    and exactly coordinate ``j`` fails with probability ``(1 − δ^k)/k``.
    """

    def __init__(self, k: int, delta: float):
        if k < 1:
            raise ParameterError(f"k must be positive, got {k}")
        if not 0.0 < delta < 1.0:
            raise ParameterError(f"delta must lie in (0, 1), got {delta}")
        self.k = int(k)
        self.delta = float(delta)
        all_accept = self.delta ** self.k
        rest = (1.0 - all_accept) / self.k
        ones = (1,) * self.k
        self.patterns: Tuple[Tuple[int, ...], ...] = (ones,) + tuple(
            ones[:j] + (0,) + ones[j + 1:] for j in range(self.k)
        )
        self.probabilities: Tuple[float, ...] = (all_accept,) + (rest,) * self.k
        self._cdf = list(accumulate(self.probabilities))

    def joint_law(self) -> Dict[Tuple[int, ...], float]:
        """Probability of every verdict vector with positive mass."""
        return dict(zip(self.patterns, self.probabilities))

    def inverse_cdf(self, u: float) -> Tuple[int, ...]:
        """Verdict vector at quantile ``u ∈ [0, 1)`` in the order all-ones, then all-but-j."""
        index = min(bisect_right(self._cdf, u), len(self.patterns) - 1)
        return self.patterns[index]

    def sample(self, rng: np.random.Generator) -> Tuple[int, ...]:
        return self.inverse_cdf(float(rng.random()))

    def conditional_failure(self, i: int) -> float:
        """Pr[coordinate ``i`` fails | every other coordinate accepts]."""
        if not 0 <= i < self.k:
            raise ParameterError(f"Coordinate {i} out of range for k={self.k}")
        rest = self.probabilities[1 + i]
        return rest / (self.probabilities[0] + rest)


def bad_correlations_prover(k: int, delta: float, n: int = 4) -> ProverStrategy:
    """
    Classical randomized strategy for the k-fold verdict-programmable game.

    The verifier's uniform queries ``q̄ ∈ [n]^k`` serve as the strategy's coins:
    query number ``x`` (row-major) is mapped through the inverse CDF of
    :class:`BadCorrelationsLaw` at ``(x + 1/2)/n^k`` and the resulting verdict
    vector is written into the ``Z2`` qubits. The realised law is exact when
    ``n^k`` times every probability is an integer and within ``n^{-k}``
    otherwise.
    """
    law = BadCorrelationsLaw(k, delta)
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    first = tuple(response_register(1, c) for c in range(k))
    second = tuple(response_register(2, c) for c in range(k))
    registers = []
    for c in range(k):
        registers += [(first[c], 1), (second[c], 2)]
    layout = RegisterLayout.of(*registers)
    total = n ** k

    def round_one(qbar):
        index = 0
        for q in qbar:
            index = index * n + int(q)
        return xor_unitary(second, law.inverse_cdf((index + 0.5) / total))

    logger.debug("Bad-correlations prover k=%d delta=%.3f over %d query strings", k, delta, total)
    return ProverStrategy(
        QuantumState.basis(layout),
        (round_one,),
        (second,),
        first,
        name=f"bad-correlations(k={k},delta={delta})",
    )


def haar_prover(protocol, rng: np.random.Generator, internal_dim: int = 2) -> ProverStrategy:
    """
    Single-fold public-coin prover with a Haar-random unitary per round and query.

    Round ``ℓ`` acts on the internal register and ``Z_ℓ`` only, so earlier
    responses are never touched.
    """
    base = getattr(protocol, "base", protocol)
    if base.kind != "public-coin":
        raise ProtocolError("haar_prover builds public-coin provers")
    internal = internal_register(0)
    registers = [(internal, internal_dim)] + [
        (response_register(ell, 0), base.response_dims[ell - 1]) for ell in range(1, base.m + 1)
    ]
    layout = RegisterLayout.of(*registers)
    tables = []
    for ell in range(1, base.m + 1):
        sub = layout.select([internal, response_register(ell, 0)])
        tables.append({
            q: Unitary(sub, unitary_group.rvs(sub.total_dim, random_state=rng))
            for q in base.query_space(ell)
        })

    def lookup(ell):
        return lambda qbar: tables[ell - 1][qbar[0]]

    return ProverStrategy(
        QuantumState.basis(layout),
        tuple(lookup(ell) for ell in range(1, base.m + 1)),
        tuple((response_register(ell, 0),) for ell in range(1, base.m + 1)),
        name="haar",
    )
