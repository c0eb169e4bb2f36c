"""
Exact optimal success and the classical provers that attain it.
"""
import logging
from collections import defaultdict
from math import prod
from typing import Dict, Hashable, Iterable, Optional, Sequence, Tuple

from config import settings
from hilbert import QuantumState, RegisterLayout
from protocols.catalog import preimage
from protocols.interaction import exact_success
from protocols.provers import ProverStrategy, response_register, shift_unitary
from protocols.repetition import RepeatedProtocol, as_repeated
from utils.errors import IntractableInstanceError, ProtocolError

logger = logging.getLogger(__name__)


def _argmax_first(values: Iterable[Tuple[Hashable, float]]) -> Tuple[Hashable, float]:
    """Lexicographically first maximizer (ties keep the earliest candidate)."""
    best, best_value = None, None
    for candidate, value in values:
        if best_value is None or value > best_value + settings.LEMMA_SLACK:
            best, best_value = candidate, value
    return best, best_value


def _public_value(protocol: RepeatedProtocol, prefix: Tuple = ()) -> float:
    ell = len(prefix) + 1
    if ell > protocol.m:
        return float(protocol.accept(prefix))
    queries = protocol.query_space(ell)
    responses = protocol.response_space(ell)
    total = 0.0
    for q in queries:
        total += max(_public_value(protocol, prefix + ((q, z),)) for z in responses)
    return total / len(queries)


def _three_values(protocol: RepeatedProtocol) -> Dict[Tuple, Tuple[float, Dict]]:
    """Per first message: (value, best second message for each query)."""
    randomness = protocol.randomness_space()
    seconds = protocol.second_space()
    values = {}
    for z1 in protocol.first_space():
        by_query = defaultdict(list)
        for r in randomness:
            by_query[protocol.query_of(r, z1)].append(r)
        total = 0.0
        choices = {}
        for q, rs in by_query.items():
            z2, wins = _argmax_first(
                (z2, sum(protocol.accept_three(r, (z1, q, z2)) for r in rs)) for z2 in seconds
            )
            choices[q] = z2
            total += wins
        values[z1] = (total / len(randomness), choices)
    return values


def _strategy_space(protocol: RepeatedProtocol) -> int:
    k = protocol.k
    base = protocol.base
    if protocol.kind == "public-coin":
        return prod(
            (len(base.query_space(ell)) * len(base.response_space(ell))) ** k
            for ell in range(1, protocol.m + 1)
        )
    return (base.first_dim * len(base.randomness_space) * base.second_dim) ** k


def optimal_success(protocol, provers: Optional[Sequence[ProverStrategy]] = None) -> float:
    """
    Exact maximum acceptance probability.

    Args:
        protocol: Base or repeated protocol with enumerable spaces
        provers: Optional family of quantum strategies; when given, the
            maximum of their exact success is returned instead

    Returns:
        The optimum over deterministic classical strategies (backward
        induction over rounds), or over ``provers``
    """
    repeated = as_repeated(protocol)
    if provers is not None:
        provers = list(provers)
        if not provers:
            raise ProtocolError("An empty prover family has no optimum")
        return max(exact_success(prover, repeated) for prover in provers)
    size = _strategy_space(repeated)
    if size > settings.MAX_STRATEGY_SPACE:
        raise IntractableInstanceError(
            f"Strategy space of {repeated.name} has {size} entries (limit {settings.MAX_STRATEGY_SPACE})"
        )
    if repeated.kind == "public-coin":
        value = _public_value(repeated)
    else:
        value = max(v for v, _ in _three_values(repeated).values())
    logger.debug("Optimal success of %s: %.6f", repeated.name, value)
    return value


def optimal_classical_prover(protocol) -> ProverStrategy:
    """
    Deterministic single-fold prover attaining :func:`optimal_success`.

    Supported for one-round public-coin protocols and three-message protocols.
    Each response is written by a cyclic shift of a ``|0⟩`` register.
    """
    repeated = as_repeated(protocol)
    if repeated.k != 1:
        raise ProtocolError("optimal_classical_prover builds single-fold provers only")
    base = repeated.base
    if base.kind == "public-coin":
        if base.m != 1:
            raise ProtocolError("optimal_classical_prover supports one-round public-coin protocols")
        register = response_register(1, 0)
        dim = base.response_dims[0]
        answers = {
            q: _argmax_first((z, base.accept(((q, z),))) for z in base.response_space(1))[0]
            for q in base.query_space(1)
        }
        layout = RegisterLayout.of((register, dim))
        return ProverStrategy(
            QuantumState.basis(layout),
            (lambda qbar: shift_unitary(register, dim, answers[qbar[0]]),),
            ((register,),),
            name=f"optimal[{base.name}]",
        )
    values = _three_values(repeated)
    z1bar, _ = _argmax_first((z1, value) for z1, (value, _) in values.items())
    answers = {q[0]: z2[0] for q, z2 in values[z1bar][1].items()}
    first, second = response_register(1, 0), response_register(2, 0)
    layout = RegisterLayout.of((first, base.first_dim), (second, base.second_dim))
    return ProverStrategy(
        QuantumState.basis(layout, {first: z1bar[0]}),
        (lambda qbar: shift_unitary(second, base.second_dim, answers.get(qbar[0], 0)),),
        ((second,),),
        (first,),
        name=f"optimal[{base.name}]",
    )


def best_guess_prover(n: int, w: int) -> ProverStrategy:
    """Prover for the preimage game answering the first preimage of each query."""
    return optimal_classical_prover(preimage(n, w))


def perfect_prover(protocol) -> ProverStrategy:
    """The optimal classical prover of a protocol whose optimum is 1."""
    value = optimal_success(protocol)
    if abs(value - 1.0) > settings.LEMMA_SLACK:
        raise ProtocolError(f"{protocol.name} has no perfect prover (optimum {value:.6f})")
    return optimal_classical_prover(protocol)
