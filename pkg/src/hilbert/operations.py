"""
State operations: tensor products, unitaries, measurements, partial traces.
"""
import logging
from typing import Hashable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import settings
from hilbert.layout import RegisterLayout
from hilbert.state import (
    Projector,
    ProjectiveMeasurement,
    QuantumState,
    Unitary,
    apply_left,
    as_measurement,
    conjugate,
)
from utils.errors import DegenerateStateError, DimensionError, LayoutError

logger = logging.getLogger(__name__)

PVMLike = Union[ProjectiveMeasurement, List[Tuple[Hashable, Projector]]]


def tensor(a: QuantumState, b: QuantumState) -> QuantumState:
    """
    Tensor product ``a ⊗ b``.

    Args:
        a: Left factor
        b: Right factor, with register names disjoint from ``a``

    Returns:
        State on the concatenated layout; pure if both factors are pure
    """
    layout = a.layout.concat(b.layout)
    if a.is_pure and b.is_pure:
        return QuantumState(layout, vector=np.kron(a.vector, b.vector))
    return QuantumState(layout, matrix=np.kron(a.density(), b.density()))


def apply_unitary(state: QuantumState, u: Unitary, targets: Optional[Sequence[str]] = None) -> QuantumState:
    """
    Apply ``u`` to the target registers, identity elsewhere.

    Args:
        state: Input state
        u: Unitary; its own layout names are the default targets
        targets: Register names of ``state`` the unitary acts on, in order

    Returns:
        The transformed state
    """
    targets = list(u.layout.names if targets is None else targets)
    if not state.layout.contains(targets):
        raise LayoutError(f"Targets {targets} are not all in {state.layout.names}")
    if state.layout.dims_of(targets) != u.layout.total_dim:
        raise DimensionError(
            f"Unitary of dim {u.layout.total_dim} does not match targets {targets}"
        )
    if state.is_pure:
        vec = apply_left(state.vector, u.matrix, state.layout, targets)
        return QuantumState(state.layout, vector=vec / np.linalg.norm(vec))
    rho = conjugate(state.matrix, u.matrix, state.layout, targets)
    return QuantumState(state.layout, matrix=rho)


def apply_operator(state: QuantumState, matrix: np.ndarray) -> QuantumState:
    """Apply a full-layout unitary matrix without re-validating it."""
    if state.is_pure:
        vec = matrix @ state.vector
        return QuantumState(state.layout, vector=vec / np.linalg.norm(vec))
    return QuantumState(state.layout, matrix=matrix @ state.matrix @ matrix.conj().T)


def _targets_of(state: QuantumState, pvm: ProjectiveMeasurement) -> List[str]:
    names = list(pvm.layout.names)
    if not state.layout.contains(names):
        raise LayoutError(f"Measurement registers {names} are not all in {state.layout.names}")
    return names


def project(state: QuantumState, projector: Projector) -> Tuple[float, np.ndarray]:
    """
    Unnormalized projection of ``state``.

    Returns:
        (probability, projected vector or density block)
    """
    targets = list(projector.layout.names)
    if state.is_pure:
        vec = apply_left(state.vector, projector.matrix, state.layout, targets)
        return float(np.vdot(vec, vec).real), vec
    block = conjugate(state.matrix, projector.matrix, state.layout, targets)
    return float(np.trace(block).real), block


def born_probabilities(state: QuantumState, pvm: PVMLike) -> List[Tuple[Hashable, float]]:
    """Exact outcome distribution of a projective measurement."""
    pvm = as_measurement(pvm)
    _targets_of(state, pvm)
    probs = [(label, max(project(state, proj)[0], 0.0)) for label, proj in pvm.outcomes]
    total = sum(p for _, p in probs)
    if abs(total - 1.0) > settings.PROBABILITY_SUM_TOLERANCE:
        logger.debug("Born probabilities sum to %.12f", total)
    return probs


def measure_projective(state: QuantumState, pvm: PVMLike,
                       rng: np.random.Generator) -> Tuple[Hashable, QuantumState]:
    """
    Sample a projective measurement with the Born rule.

    Args:
        state: State to measure
        pvm: Complete orthogonal projectors (validated) on registers of the state
        rng: Random stream for the outcome draw

    Returns:
        (outcome label, normalized post-measurement state)
    """
    pvm = as_measurement(pvm)
    _targets_of(state, pvm)
    branches = [(label,) + project(state, proj) for label, proj in pvm.outcomes]
    probs = np.array([max(p, 0.0) for _, p, _ in branches])
    if probs.max(initial=0.0) < settings.PROBABILITY_FLOOR:
        raise DegenerateStateError("All outcome probabilities are below the floor")
    probs = np.where(probs < settings.PROBABILITY_FLOOR, 0.0, probs)
    choice = int(rng.choice(len(branches), p=probs / probs.sum()))
    label, _, data = branches[choice]
    logger.debug("Measured outcome %r with probability %.6f", label, probs[choice])
    return label, QuantumState.from_unnormalized(state.layout, data)


def partial_trace(state: QuantumState, discard: Iterable[str]) -> QuantumState:
    """
    Trace out registers.

    Args:
        state: State on the full layout
        discard: Register names to remove

    Returns:
        Mixed state on the remaining registers (same object if nothing is discarded)
    """
    discard = list(discard)
    if not discard:
        return state
    keep_layout = state.layout.without(discard)
    dims = state.layout.dims
    keep_pos = [state.layout.index(name) for name in keep_layout.names]
    drop_pos = [state.layout.index(name) for name in discard]
    dk = keep_layout.total_dim
    dd = state.layout.dims_of(discard)
    if state.is_pure:
        amp = np.transpose(state.vector.reshape(dims), keep_pos + drop_pos).reshape(dk, dd)
        rho = amp @ amp.conj().T
    else:
        n = len(dims)
        tensor = state.matrix.reshape(dims + dims)
        order = keep_pos + drop_pos + [n + p for p in keep_pos] + [n + p for p in drop_pos]
        tensor = np.transpose(tensor, order).reshape(dk, dd, dk, dd)
        rho = np.einsum("ajbj->ab", tensor)
    return QuantumState(keep_layout, matrix=rho)
