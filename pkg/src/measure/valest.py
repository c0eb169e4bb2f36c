"""
Value estimation: the spectral measurement of a success operator on a value grid.

The measurement projects onto unions of eigenspaces of ``M`` whose eigenvalues
round to the same grid point, so it is exactly projective and repeating it
returns the same value with probability one.
"""
import logging
from dataclasses import dataclass
from math import ceil
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from config import settings
from hilbert import Projector, ProjectiveMeasurement, QuantumState, RegisterLayout
from measure.game import GameSpec, success_operator
from utils.errors import DegenerateStateError, LayoutError, MeasurementError, ParameterError

logger = logging.getLogger(__name__)


def grid_size(epsilon: float) -> int:
    """``N_{ε,δ} = ceil(1/ε) + 1`` points."""
    if not 0 < epsilon <= 1:
        raise ParameterError(f"epsilon must lie in (0, 1], got {epsilon}")
    return int(ceil(round(1.0 / epsilon, 9))) + 1


def value_grid(epsilon: float) -> np.ndarray:
    """Uniform grid over [0, 1] with spacing at most ``epsilon``; includes both endpoints."""
    return np.linspace(0.0, 1.0, grid_size(epsilon))


def decompose(operator: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of a Hermitian operator with spectrum in [0, 1].

    Eigenvalues within the clamp window outside [0, 1] are clamped; anything
    further out is an error.
    """
    operator = np.asarray(operator, dtype=complex)
    if np.max(np.abs(operator - operator.conj().T), initial=0.0) > settings.HERMITIAN_TOLERANCE:
        raise MeasurementError("Success operator is not Hermitian")
    values, vectors = scipy.linalg.eigh(operator)
    low, high = float(values[0]), float(values[-1])
    if low < -settings.EIGENVALUE_CLAMP or high > 1.0 + settings.EIGENVALUE_CLAMP:
        raise MeasurementError(f"Spectrum [{low}, {high}] leaves [0, 1]")
    return np.clip(values, 0.0, 1.0), vectors


@dataclass(frozen=True)
class MeasurementOutcome:
    """Result ``(ρ*, p*)`` of one value measurement."""

    value: float
    post_state: QuantumState
    block_index: int


@dataclass(frozen=True)
class ValueBlock:
    """Union of eigenspaces sharing a grid cell."""

    grid_index: int
    value: float
    basis: np.ndarray


class ValueMeasurement:
    """Grid instantiation ``M_{ε,δ}`` of a success operator."""

    def __init__(self, operator: np.ndarray, layout: RegisterLayout, epsilon: float,
                 delta: float, game: Optional[GameSpec] = None,
                 spectrum: Optional[Tuple[np.ndarray, np.ndarray]] = None):
        """
        Build the measurement.

        Args:
            operator: Hermitian success operator on ``layout``
            layout: Register layout the operator acts on
            epsilon: Grid accuracy in (0, 1]
            delta: Failure bound in (0, 1]; carried for the bound formulas only
            game: Game the operator came from, if any
            spectrum: Precomputed ``(eigenvalues, eigenvectors)`` of ``operator``
        """
        if not 0 < delta <= 1:
            raise ParameterError(f"delta must lie in (0, 1], got {delta}")
        operator = np.asarray(operator, dtype=complex)
        if operator.shape != (layout.total_dim, layout.total_dim):
            raise LayoutError(f"Operator of shape {operator.shape} does not fit layout {layout.names}")
        self.layout = layout
        self.epsilon = float(epsilon)
        self.delta = float(delta)
        self.game = game
        self.grid = value_grid(epsilon)
        self.success_operator = operator
        eigenvalues, eigenvectors = spectrum if spectrum is not None else decompose(operator)
        self.eigenvalues = eigenvalues
        bins = np.rint(eigenvalues * (len(self.grid) - 1)).astype(int)
        blocks = []
        for grid_index in sorted(set(bins.tolist())):
            columns = eigenvectors[:, bins == grid_index]
            blocks.append(ValueBlock(grid_index, float(self.grid[grid_index]), columns))
        self.blocks: Tuple[ValueBlock, ...] = tuple(blocks)
        self._pvm: Optional[ProjectiveMeasurement] = None

    @classmethod
    def from_operator(cls, operator: np.ndarray, layout: RegisterLayout, epsilon: float,
                      delta: float) -> "ValueMeasurement":
        """Measurement of any Hermitian operator with spectrum in [0, 1]."""
        return cls(operator, layout, epsilon, delta)

    @classmethod
    def from_game(cls, game: GameSpec, epsilon: float, delta: float) -> "ValueMeasurement":
        return cls(success_operator(game), game.layout, epsilon, delta, game=game)

    @property
    def n_outcomes(self) -> int:
        return len(self.grid)

    @property
    def spacing(self) -> float:
        return 1.0 / (len(self.grid) - 1)

    def _check(self, state: QuantumState) -> None:
        if state.layout != self.layout:
            raise LayoutError(f"State layout {state.layout.names} does not match {self.layout.names}")

    def project(self, state: QuantumState, position: int) -> Tuple[float, np.ndarray]:
        """Unnormalized projection of ``state`` onto block ``position``."""
        basis = self.blocks[position].basis
        if state.is_pure:
            coeffs = basis.conj().T @ state.vector
            return float(np.vdot(coeffs, coeffs).real), basis @ coeffs
        inner = basis.conj().T @ state.matrix @ basis
        return float(np.trace(inner).real), basis @ inner @ basis.conj().T

    def probabilities(self, state: QuantumState) -> np.ndarray:
        """Born probability of every occupied block."""
        self._check(state)
        probs = np.empty(len(self.blocks))
        for position, block in enumerate(self.blocks):
            if state.is_pure:
                coeffs = block.basis.conj().T @ state.vector
                probs[position] = float(np.vdot(coeffs, coeffs).real)
            else:
                probs[position] = float(np.einsum(
                    "ij,ji->", block.basis.conj().T, state.matrix @ block.basis).real)
        return np.clip(probs, 0.0, None)

    def expectation(self, state: QuantumState) -> float:
        """``Tr(M ρ)``."""
        self._check(state)
        return state.expectation(self.success_operator)

    def pvm(self) -> ProjectiveMeasurement:
        """The measurement as validated projectors labelled by grid value."""
        if self._pvm is None:
            self._pvm = ProjectiveMeasurement.from_pairs(
                (block.value, Projector.from_basis(self.layout, block.basis)) for block in self.blocks
            )
        return self._pvm


class ValueMeasurementFamily:
    """
    One success operator and every grid instantiation ``M_{ε,δ}`` of it.

    The eigendecomposition is computed once and shared by all members.
    """

    def __init__(self, operator: np.ndarray, layout: RegisterLayout,
                 game: Optional[GameSpec] = None):
        """
        Initialize the family.

        Args:
            operator: Hermitian success operator
            layout: Register layout of the operator
            game: Originating game, if any
        """
        self.operator = np.asarray(operator, dtype=complex)
        self.layout = layout
        self.game = game
        self.spectrum = decompose(self.operator)
        self._members: Dict[Tuple[float, float], ValueMeasurement] = {}

    @classmethod
    def from_game(cls, game: GameSpec) -> "ValueMeasurementFamily":
        return cls(success_operator(game), game.layout, game=game)

    def at(self, epsilon: float, delta: float) -> ValueMeasurement:
        """Member ``M_{ε,δ}``."""
        key = (float(epsilon), float(delta))
        if key not in self._members:
            self._members[key] = ValueMeasurement(
                self.operator, self.layout, epsilon, delta, game=self.game, spectrum=self.spectrum
            )
        return self._members[key]


def valest(m: ValueMeasurement, state: QuantumState, rng: np.random.Generator) -> MeasurementOutcome:
    """
    Measure the value of ``state``.

    Args:
        m: Value measurement
        state: State on the measurement's layout
        rng: Random stream for the outcome draw

    Returns:
        Grid value, post-measurement state and the measured block
    """
    probs = m.probabilities(state)
    if probs.max(initial=0.0) < settings.PROBABILITY_FLOOR:
        raise DegenerateStateError("State has no weight on any value block")
    if len(probs) == 1:
        block = m.blocks[0]
        return MeasurementOutcome(block.value, state, block.grid_index)
    probs = np.where(probs < settings.PROBABILITY_FLOOR, 0.0, probs)
    position = int(rng.choice(len(probs), p=probs / probs.sum()))
    _, data = m.project(state, position)
    block = m.blocks[position]
    logger.debug("ValEst returned %.6f (p=%.6f)", block.value, probs[position])
    return MeasurementOutcome(block.value, QuantumState.from_unnormalized(m.layout, data), block.grid_index)


def valest_exact(m: ValueMeasurement, state: QuantumState) -> float:
    """Non-disturbing oracle: ``Tr(M ρ)``."""
    return m.expectation(state)


def outcome_distribution(m: ValueMeasurement, state: QuantumState) -> List[Tuple[float, float]]:
    """Exact ``(grid value, probability)`` pairs over occupied blocks."""
    return [(block.value, float(p)) for block, p in zip(m.blocks, m.probabilities(state))]
