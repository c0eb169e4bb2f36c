"""
Distance measures between states and classical-quantum ensembles.
"""
from dataclasses import dataclass
from typing import Dict, Hashable, Iterable, Mapping, Tuple, Union

import numpy as np

from config import settings
from hilbert.layout import RegisterLayout
from hilbert.state import QuantumState
from utils.errors import LayoutError, ParameterError


def _trace_norm(diff: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


@dataclass(frozen=True)
class ClassicalQuantumEnsemble:
    """
    Ensemble ``Σ_ℓ p_ℓ |ℓ⟩⟨ℓ| ⊗ ρ_ℓ``.

    Pairs sharing a label are merged into one unnormalized block.
    """

    layout: RegisterLayout
    blocks: Tuple[Tuple[Hashable, np.ndarray], ...]

    def weights(self) -> Dict[Hashable, float]:
        return {label: float(np.trace(block).real) for label, block in self.blocks}

    def block(self, label: Hashable) -> np.ndarray:
        for candidate, block in self.blocks:
            if candidate == label:
                return block
        dim = self.layout.total_dim
        return np.zeros((dim, dim), dtype=complex)

    def labels(self) -> Tuple[Hashable, ...]:
        return tuple(label for label, _ in self.blocks)


def classical_ensemble_state(pairs: Iterable[Tuple[float, Hashable, QuantumState]]) -> ClassicalQuantumEnsemble:
    """
    Build a classical-quantum ensemble from ``(probability, label, state)`` triples.

    Args:
        pairs: Triples whose probabilities sum to one

    Returns:
        The merged ensemble
    """
    pairs = list(pairs)
    if not pairs:
        raise ParameterError("An ensemble needs at least one member")
    layout = pairs[0][2].layout
    merged: Dict[Hashable, np.ndarray] = {}
    order = []
    total = 0.0
    for prob, label, state in pairs:
        if prob < 0:
            raise ParameterError(f"Negative ensemble probability {prob}")
        if state.layout != layout:
            raise LayoutError("Ensemble members must share one layout")
        total += prob
        if label not in merged:
            merged[label] = np.zeros((layout.total_dim, layout.total_dim), dtype=complex)
            order.append(label)
        merged[label] = merged[label] + prob * state.density()
    if abs(total - 1.0) > settings.PROBABILITY_SUM_TOLERANCE:
        raise ParameterError(f"Ensemble probabilities sum to {total}, not 1")
    return ClassicalQuantumEnsemble(layout, tuple((label, merged[label]) for label in order))


def ensemble_from_blocks(layout: RegisterLayout,
                         blocks: Mapping[Hashable, np.ndarray]) -> ClassicalQuantumEnsemble:
    """Wrap already-weighted blocks (trace = label probability) as an ensemble."""
    return ClassicalQuantumEnsemble(layout, tuple((label, np.asarray(block, dtype=complex))
                                                  for label, block in blocks.items()))


Distinguishable = Union[QuantumState, ClassicalQuantumEnsemble]


def trace_distance(a: Distinguishable, b: Distinguishable) -> float:
    """
    Trace distance ``½‖ρ_a − ρ_b‖₁``.

    Ensembles are compared as block-diagonal operators indexed by label.

    Args:
        a: State or ensemble
        b: State or ensemble of the same kind and layout

    Returns:
        Distance in [0, 1]
    """
    if a.layout != b.layout:
        raise LayoutError("Trace distance needs identical layouts")
    if isinstance(a, ClassicalQuantumEnsemble) or isinstance(b, ClassicalQuantumEnsemble):
        if not (isinstance(a, ClassicalQuantumEnsemble) and isinstance(b, ClassicalQuantumEnsemble)):
            raise LayoutError("Cannot compare a state with an ensemble")
        labels = list(dict.fromkeys(a.labels() + b.labels()))
        value = 0.5 * sum(_trace_norm(a.block(label) - b.block(label)) for label in labels)
    elif a.is_pure and b.is_pure:
        overlap = abs(np.vdot(a.vector, b.vector)) ** 2
        value = float(np.sqrt(max(0.0, 1.0 - overlap)))
    else:
        value = 0.5 * _trace_norm(a.density() - b.density())
    return float(min(max(value, 0.0), 1.0))


def total_variation(p: Mapping[Hashable, float], q: Mapping[Hashable, float]) -> float:
    """Total variation distance between two finite distributions."""
    support = set(p) | set(q)
    return 0.5 * sum(abs(p.get(x, 0.0) - q.get(x, 0.0)) for x in support)
