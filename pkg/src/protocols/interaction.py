"""
Running provers against protocols, and the residual games the reductions measure.
"""
import logging
from itertools import product
from typing import Hashable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from config import settings
from hilbert import (
    ProjectiveMeasurement,
    QuantumState,
    Unitary,
    apply_operator,
    born_probabilities,
    measure_projective,
    project,
)
from measure import GameSpec, success_operator
from protocols.provers import ProverStrategy
from protocols.repetition import RepeatedProtocol, Transcript, as_repeated, threshold_verdict
from utils.errors import IntractableInstanceError, LayoutError, ProtocolError
from utils.rng import make_rng

logger = logging.getLogger(__name__)


def measure_registers(state: QuantumState, names: Sequence[str],
                      rng: np.random.Generator) -> Tuple[Tuple[int, ...], QuantumState]:
    """Measure registers in the computational basis, returning their values and the post-state."""
    names = list(names)
    sub = state.layout.select(names)
    label, post = measure_projective(state, ProjectiveMeasurement.computational(sub), rng)
    values = sub.register_values(label)
    return tuple(values[name] for name in names), post


def register_distribution(state: QuantumState,
                          names: Sequence[str]) -> Iterable[Tuple[Tuple[int, ...], float, QuantumState]]:
    """Exact branches ``(values, probability, post-state)`` of a computational-basis measurement."""
    names = list(names)
    sub = state.layout.select(names)
    pvm = ProjectiveMeasurement.computational(sub)
    for label, p in born_probabilities(state, pvm):
        if p < settings.PROBABILITY_FLOOR:
            continue
        values = sub.register_values(label)
        _, data = project(state, pvm.projector(label))
        yield tuple(values[name] for name in names), p, QuantumState.from_unnormalized(state.layout, data)


def check_compatible(prover: ProverStrategy, protocol: RepeatedProtocol) -> None:
    """Raise ``LayoutError`` unless the prover's registers fit the repeated protocol."""
    if prover.k != protocol.k:
        raise LayoutError(f"Prover width {prover.k} does not match k={protocol.k}")
    base = protocol.base
    if protocol.kind == "public-coin":
        if prover.rounds != base.m:
            raise LayoutError(f"Prover has {prover.rounds} rounds, protocol has {base.m}")
        for ell in range(1, base.m + 1):
            if any(d != base.response_dims[ell - 1] for d in prover.response_dims(ell)):
                raise LayoutError(f"Round {ell} response registers do not match dim {base.response_dims[ell - 1]}")
    else:
        if prover.rounds != 1 or len(prover.first_message) != protocol.k:
            raise LayoutError("Three-message provers need first-message registers and one query round")
        if any(prover.layout.dim(name) != base.first_dim for name in prover.first_message):
            raise LayoutError(f"First-message registers must have dim {base.first_dim}")
        if any(d != base.second_dim for d in prover.response_dims(1)):
            raise LayoutError(f"Second-message registers must have dim {base.second_dim}")


def _uniform(space: Sequence[Hashable], rng: np.random.Generator) -> Hashable:
    return space[int(rng.integers(len(space)))]


def run_interaction(prover: ProverStrategy, protocol,
                    rng: Union[np.random.Generator, int]) -> Tuple[Transcript, int]:
    """
    Simulate one full interaction of ``prover`` with ``protocol``.

    Args:
        prover: Strategy whose width matches the protocol
        protocol: Base or repeated protocol (a base protocol runs as its 1-fold repetition)
        rng: Generator or integer seed

    Returns:
        (complete transcript with verdicts, threshold verdict bit)
    """
    rng = make_rng(rng) if isinstance(rng, (int, np.integer)) else rng
    protocol = as_repeated(protocol)
    check_compatible(prover, protocol)
    base = protocol.base
    state = prover.initial_state

    if protocol.kind == "public-coin":
        entries = []
        for ell in range(1, protocol.m + 1):
            space = base.query_space(ell)
            qbar = tuple(_uniform(space, rng) for _ in range(protocol.k))
            u = prover.unitary_matrix(ell, qbar)
            if u is not None:
                state = apply_operator(state, u)
            zbar, state = measure_registers(state, prover.responses[ell - 1], rng)
            entries.append((qbar, zbar))
        verdicts = protocol.coordinate_accepts(entries)
        transcript = Transcript(tuple(entries), width=protocol.k, verdicts=verdicts)
    else:
        z1bar, state = measure_registers(state, prover.first_message, rng)
        rbar = tuple(_uniform(base.randomness_space, rng) for _ in range(protocol.k))
        qbar = protocol.query_of(rbar, z1bar)
        u = prover.unitary_matrix(1, qbar)
        if u is not None:
            state = apply_operator(state, u)
        z2bar, state = measure_registers(state, prover.responses[0], rng)
        verdicts = protocol.coordinate_accepts_three(rbar, (z1bar, qbar, z2bar))
        transcript = Transcript(
            ((qbar, z2bar),), width=protocol.k, verdicts=verdicts,
            first_message=z1bar, randomness=rbar,
        )
    verdict = threshold_verdict(verdicts, protocol.t)
    logger.debug("Interaction %s with %s: verdicts %s -> %d", protocol.name, prover.name, verdicts, verdict)
    return transcript, verdict


def _compose(prover: ProverStrategy, factors: Sequence[Optional[np.ndarray]]) -> Optional[Unitary]:
    total = None
    for matrix in factors:
        if matrix is None:
            continue
        total = matrix if total is None else matrix @ total
    return None if total is None else Unitary(prover.layout, total)


def public_coin_game(prover: ProverStrategy, protocol: RepeatedProtocol, ell: int,
                     prefix: Sequence[Tuple[Tuple, Tuple]] = (),
                     fixed_query: Optional[Tuple] = None) -> GameSpec:
    """
    Residual game from round ``ell`` given the transcript prefix ``τ_{ℓ−1}``.

    Coins are the k-fold queries of rounds ``ell..m`` (round ``ell`` pinned to
    ``fixed_query`` when given); the adversary is ``U_m ⋯ U_ℓ`` and the
    responses are all of ``𝓩_ℓ … 𝓩_m``. The verdict is the threshold verdict
    of the full transcript.

    Args:
        prover: Strategy whose unitaries form the adversary
        protocol: Repeated public-coin protocol
        ell: First round of the residual game (1-based)
        prefix: Transcript entries of rounds ``1..ell-1``
        fixed_query: Optional pinned round-``ell`` query (CheckCoins)

    Returns:
        The residual game
    """
    protocol = as_repeated(protocol)
    m = protocol.m
    prefix = tuple(prefix)
    if not 1 <= ell <= m or len(prefix) != ell - 1:
        raise ProtocolError(f"Round {ell} with a prefix of {len(prefix)} entries is out of range for m={m}")
    spaces = [protocol.query_space(j) for j in range(ell, m + 1)]
    if fixed_query is not None:
        spaces[0] = (tuple(fixed_query),)
    count = int(np.prod([len(space) for space in spaces], dtype=float))
    if count > settings.MAX_COIN_STRINGS:
        raise IntractableInstanceError(f"Residual game from round {ell} has {count} coin strings")
    coins = tuple(product(*spaces))
    rounds = list(range(ell, m + 1))
    registers = tuple(name for j in rounds for name in prover.responses[j - 1])
    k = protocol.k

    def adversary(coin):
        return _compose(prover, [prover.unitary_matrix(j, q) for j, q in zip(rounds, coin)])

    def verdict(coin, z):
        entries = prefix + tuple(
            (q, tuple(z[offset * k:(offset + 1) * k])) for offset, q in enumerate(coin)
        )
        return protocol.accept(entries)

    return GameSpec(
        prover.layout, coins, verdict, adversary, registers,
        name=f"{protocol.name}[round {ell}]",
    )


def three_message_game(prover: ProverStrategy, protocol: RepeatedProtocol,
                       z1bar: Sequence[int]) -> GameSpec:
    """Game over ``r̄ ∈ R^k`` with the first message ``z̄₁`` hardwired."""
    protocol = as_repeated(protocol)
    z1bar = tuple(z1bar)
    if len(z1bar) != protocol.k:
        raise ProtocolError(f"First message width {len(z1bar)} does not match k={protocol.k}")

    def adversary(rbar):
        matrix = prover.unitary_matrix(1, protocol.query_of(rbar, z1bar))
        return None if matrix is None else Unitary(prover.layout, matrix)

    def verdict(rbar, z2bar):
        return protocol.accept_three(rbar, (z1bar, protocol.query_of(rbar, z1bar), tuple(z2bar)))

    return GameSpec(
        prover.layout, protocol.randomness_space(), verdict, adversary, prover.responses[0],
        name=f"{protocol.name}[z1={list(z1bar)}]",
    )


def exact_success(prover: ProverStrategy, protocol) -> float:
    """Exact acceptance probability of ``prover`` against ``protocol``."""
    protocol = as_repeated(protocol)
    check_compatible(prover, protocol)
    if protocol.kind == "public-coin":
        game = public_coin_game(prover, protocol, 1)
        return prover.initial_state.expectation(success_operator(game))
    total = 0.0
    for z1bar, p, post in register_distribution(prover.initial_state, prover.first_message):
        total += p * post.expectation(success_operator(three_message_game(prover, protocol, z1bar)))
    return total


def verdict_marginals(transcripts: Iterable[Transcript]) -> np.ndarray:
    """
    Per-coordinate verdict counts over complete transcripts.

    Returns:
        Integer array of shape (k, 2); row ``i`` counts rejections then acceptances
    """
    counts = None
    for transcript in transcripts:
        if transcript.verdicts is None:
            continue
        if counts is None:
            counts = np.zeros((transcript.width, 2), dtype=int)
        for i, v in enumerate(transcript.verdicts):
            counts[i, int(bool(v))] += 1
    if counts is None:
        raise ProtocolError("No complete transcripts to summarize")
    return counts
