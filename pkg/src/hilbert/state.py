"""
Dense quantum states, projectors and unitaries over a register layout.
"""
from dataclasses import dataclass, field
from typing import Hashable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import settings
from hilbert.layout import RegisterLayout
from utils.errors import DimensionError, LayoutError, MeasurementError, StateError


def apply_left(data: np.ndarray, matrix: np.ndarray, layout: RegisterLayout,
               targets: Sequence[str]) -> np.ndarray:
    """
    Multiply ``matrix`` (acting on ``targets``) into the first axis of ``data``.

    Args:
        data: Array of shape (D,) or (D, X) indexed by the layout basis
        matrix: Square matrix over the product of the target registers
        layout: Layout that indexes the first axis of ``data``
        targets: Register names the matrix acts on, in matrix order

    Returns:
        Array of the same shape as ``data``
    """
    targets = list(targets)
    if not targets:
        return data
    positions = [layout.index(name) for name in targets]
    target_dim = layout.dims_of(targets)
    if matrix.shape != (target_dim, target_dim):
        raise DimensionError(
            f"Operator of shape {matrix.shape} does not act on {targets} (dim {target_dim})"
        )
    trailing = data.shape[1:]
    tensor = data.reshape(layout.dims + trailing)
    front = list(range(len(positions)))
    tensor = np.moveaxis(tensor, positions, front)
    moved_shape = tensor.shape
    tensor = matrix @ tensor.reshape(target_dim, -1)
    tensor = np.moveaxis(tensor.reshape(moved_shape), front, positions)
    return tensor.reshape(data.shape)


def operator_on(layout: RegisterLayout, targets: Sequence[str], matrix: np.ndarray) -> np.ndarray:
    """Lift a register-local operator to the full layout (identity elsewhere)."""
    eye = np.eye(layout.total_dim, dtype=complex)
    return apply_left(eye, np.asarray(matrix, dtype=complex), layout, targets)


def conjugate(rho: np.ndarray, matrix: np.ndarray, layout: RegisterLayout,
              targets: Sequence[str]) -> np.ndarray:
    """Return ``A ρ A†`` for a Hermitian ``ρ`` and a register-local ``A``."""
    half = apply_left(rho, matrix, layout, targets)
    return apply_left(half.conj().T, matrix, layout, targets)


@dataclass(frozen=True)
class QuantumState:
    """
    Pure (amplitude vector) or mixed (density operator) state on a layout.

    Exactly one of ``vector`` and ``matrix`` is set. Pure states are promoted
    to density operators only when an operation needs it.
    """

    layout: RegisterLayout
    vector: Optional[np.ndarray] = None
    matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        if (self.vector is None) == (self.matrix is None):
            raise StateError("A state is either pure or mixed")
        dim = self.layout.total_dim
        if self.vector is not None:
            if dim > settings.MAX_PURE_DIM:
                raise DimensionError(f"Pure states are limited to dim {settings.MAX_PURE_DIM}")
            vec = np.asarray(self.vector, dtype=complex).reshape(-1)
            if vec.shape != (dim,):
                raise DimensionError(f"Amplitude vector has length {vec.size}, layout needs {dim}")
            norm = float(np.vdot(vec, vec).real)
            if abs(norm - 1.0) > settings.NORM_TOLERANCE:
                raise StateError(f"Pure state is not normalized (norm² = {norm})")
            vec.setflags(write=False)
            object.__setattr__(self, "vector", vec)
        else:
            if dim > settings.MAX_MIXED_DIM:
                raise DimensionError(f"Density operators are limited to dim {settings.MAX_MIXED_DIM}")
            rho = np.asarray(self.matrix, dtype=complex)
            if rho.shape != (dim, dim):
                raise DimensionError(f"Density matrix has shape {rho.shape}, layout needs {(dim, dim)}")
            if np.max(np.abs(rho - rho.conj().T), initial=0.0) > settings.HERMITIAN_TOLERANCE:
                raise StateError("Density matrix is not Hermitian")
            trace = float(np.trace(rho).real)
            if abs(trace - 1.0) > settings.NORM_TOLERANCE:
                raise StateError(f"Density matrix has trace {trace}")
            low = float(np.linalg.eigvalsh(rho)[0])
            if low < -settings.NORM_TOLERANCE:
                raise StateError(f"Density matrix has negative eigenvalue {low}")
            rho = (rho + rho.conj().T) / 2
            rho.setflags(write=False)
            object.__setattr__(self, "matrix", rho)

    @classmethod
    def pure(cls, layout: RegisterLayout, amplitudes: Iterable[complex]) -> "QuantumState":
        if not isinstance(amplitudes, np.ndarray):
            amplitudes = list(amplitudes)
        return cls(layout, vector=np.asarray(amplitudes, dtype=complex))

    @classmethod
    def mixed(cls, layout: RegisterLayout, rho: np.ndarray) -> "QuantumState":
        return cls(layout, matrix=np.asarray(rho, dtype=complex))

    @classmethod
    def basis(cls, layout: RegisterLayout, values: Union[int, dict] = 0) -> "QuantumState":
        """Computational basis state, by flat index or per-register values."""
        index = values if isinstance(values, (int, np.integer)) else layout.basis_index(values)
        vec = np.zeros(layout.total_dim, dtype=complex)
        vec[int(index)] = 1.0
        return cls(layout, vector=vec)

    @classmethod
    def maximally_mixed(cls, layout: RegisterLayout) -> "QuantumState":
        dim = layout.total_dim
        return cls(layout, matrix=np.eye(dim, dtype=complex) / dim)

    @classmethod
    def from_unnormalized(cls, layout: RegisterLayout, data: np.ndarray) -> "QuantumState":
        """Normalize a projected vector or density block into a state."""
        if data.ndim == 1:
            return cls(layout, vector=data / np.linalg.norm(data))
        rho = (data + data.conj().T) / 2
        return cls(layout, matrix=rho / np.trace(rho).real)

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @property
    def num_qubits(self) -> float:
        return self.layout.num_qubits

    def density(self) -> np.ndarray:
        """Density operator of the state (computed for pure states)."""
        if self.matrix is not None:
            return self.matrix
        return np.outer(self.vector, self.vector.conj())

    def as_mixed(self) -> "QuantumState":
        return self if not self.is_pure else QuantumState(self.layout, matrix=self.density())

    def expectation(self, operator: np.ndarray) -> float:
        """Real part of ``Tr(A ρ)`` for an operator on the full layout."""
        if self.is_pure:
            return float(np.vdot(self.vector, operator @ self.vector).real)
        return float(np.trace(operator @ self.matrix).real)

    def diagonal(self) -> np.ndarray:
        """Computational-basis probabilities."""
        if self.is_pure:
            return np.abs(self.vector) ** 2
        return np.clip(np.diag(self.matrix).real, 0.0, None)


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector on the registers of ``layout``."""

    layout: RegisterLayout
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        dim = self.layout.total_dim
        if mat.shape != (dim, dim):
            raise DimensionError(f"Projector has shape {mat.shape}, layout needs {(dim, dim)}")
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > settings.HERMITIAN_TOLERANCE:
            raise StateError("Projector is not Hermitian")
        if np.max(np.abs(mat @ mat - mat), initial=0.0) > settings.PROJECTOR_TOLERANCE:
            raise StateError("Projector is not idempotent")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_basis(cls, layout: RegisterLayout, columns: np.ndarray) -> "Projector":
        """Projector onto the span of orthonormal columns."""
        columns = np.asarray(columns, dtype=complex).reshape(layout.total_dim, -1)
        return cls(layout, columns @ columns.conj().T)

    @classmethod
    def diagonal(cls, layout: RegisterLayout, mask: Iterable[bool]) -> "Projector":
        """Projector onto the computational basis states selected by ``mask``."""
        return cls(layout, np.diag(np.asarray(list(mask), dtype=float)).astype(complex))

    def complement(self) -> "Projector":
        return Projector(self.layout, np.eye(self.layout.total_dim) - self.matrix)

    def rank(self) -> int:
        return int(round(float(np.trace(self.matrix).real)))


@dataclass(frozen=True)
class Unitary:
    """Unitary acting on the registers of ``layout``."""

    layout: RegisterLayout
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        dim = self.layout.total_dim
        if mat.shape != (dim, dim):
            raise DimensionError(f"Unitary has shape {mat.shape}, layout needs {(dim, dim)}")
        if np.max(np.abs(mat @ mat.conj().T - np.eye(dim)), initial=0.0) > settings.UNITARY_TOLERANCE:
            raise StateError("Matrix is not unitary")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, layout: RegisterLayout) -> "Unitary":
        return cls(layout, np.eye(layout.total_dim, dtype=complex))

    @classmethod
    def permutation(cls, layout: RegisterLayout, mapping: Sequence[int]) -> "Unitary":
        """Basis permutation sending ``|j⟩`` to ``|mapping[j]⟩``."""
        dim = layout.total_dim
        if sorted(mapping) != list(range(dim)):
            raise StateError("Mapping is not a permutation of the basis")
        mat = np.zeros((dim, dim), dtype=complex)
        mat[list(mapping), list(range(dim))] = 1.0
        return cls(layout, mat)

    def dagger(self) -> "Unitary":
        return Unitary(self.layout, self.matrix.conj().T)

    def then(self, other: "Unitary") -> "Unitary":
        """The unitary ``other · self`` (apply ``self`` first); layouts must match."""
        if other.layout != self.layout:
            raise LayoutError("Cannot compose unitaries on different layouts")
        return Unitary(self.layout, other.matrix @ self.matrix)

    def on(self, layout: RegisterLayout) -> np.ndarray:
        """Full-layout matrix of this unitary."""
        return operator_on(layout, self.layout.names, self.matrix)


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Complete, mutually orthogonal family of labelled projectors."""

    outcomes: Tuple[Tuple[Hashable, Projector], ...]
    labels: Tuple[Hashable, ...] = field(init=False)

    def __post_init__(self):
        outcomes = tuple((label, proj) for label, proj in self.outcomes)
        if not outcomes:
            raise MeasurementError("A measurement needs at least one outcome")
        layout = outcomes[0][1].layout
        if any(proj.layout != layout for _, proj in outcomes):
            raise MeasurementError("All projectors must share one layout")
        labels = tuple(label for label, _ in outcomes)
        if len(set(labels)) != len(labels):
            raise MeasurementError(f"Outcome labels must be distinct: {labels}")
        total = sum(proj.matrix for _, proj in outcomes)
        if np.max(np.abs(total - np.eye(layout.total_dim))) > settings.PROJECTOR_TOLERANCE:
            raise MeasurementError("Projectors do not sum to the identity")
        for a in range(len(outcomes)):
            for b in range(a + 1, len(outcomes)):
                overlap = outcomes[a][1].matrix @ outcomes[b][1].matrix
                if np.max(np.abs(overlap), initial=0.0) > settings.PROJECTOR_TOLERANCE:
                    raise MeasurementError(f"Outcomes {labels[a]!r} and {labels[b]!r} are not orthogonal")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Hashable, Projector]]) -> "ProjectiveMeasurement":
        return cls(tuple(pairs))

    @classmethod
    def computational(cls, layout: RegisterLayout, register: Optional[str] = None) -> "ProjectiveMeasurement":
        """Measure one register (or the whole layout) in the computational basis."""
        names = [register] if register is not None else list(layout.names)
        sub = layout.select(names)
        pairs = []
        for value in range(sub.total_dim):
            mask = np.zeros(sub.total_dim)
            mask[value] = 1.0
            pairs.append((value, Projector.diagonal(sub, mask)))
        return cls(tuple(pairs))

    @property
    def layout(self) -> RegisterLayout:
        return self.outcomes[0][1].layout

    def projector(self, label: Hashable) -> Projector:
        for candidate, proj in self.outcomes:
            if candidate == label:
                return proj
        raise MeasurementError(f"Unknown outcome label {label!r}")

    def binary(self, label: Hashable) -> "ProjectiveMeasurement":
        """The two-outcome measurement ``{Π_y, I − Π_y}`` labelled ``True``/``False``."""
        proj = self.projector(label)
        return ProjectiveMeasurement(((True, proj), (False, proj.complement())))

    def __len__(self) -> int:
        return len(self.outcomes)


def as_measurement(pvm: Union[ProjectiveMeasurement, List[Tuple[Hashable, Projector]]]) -> ProjectiveMeasurement:
    """Accept either a validated measurement or a raw list of pairs."""
    if isinstance(pvm, ProjectiveMeasurement):
        return pvm
    return ProjectiveMeasurement.from_pairs(pvm)
