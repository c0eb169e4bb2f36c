"""
Register layouts for composite Hilbert spaces.
"""
from dataclasses import dataclass
from math import log2, prod
from typing import Iterable, Sequence, Tuple

from utils.errors import LayoutError


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered list of named registers; basis index is row-major over them."""

    registers: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.registers]
        if len(set(names)) != len(names):
            raise LayoutError(f"Register names must be unique: {names}")
        for name, dim in self.registers:
            if int(dim) < 1:
                raise LayoutError(f"Register {name!r} has non-positive dimension {dim}")

    @classmethod
    def of(cls, *registers: Tuple[str, int]) -> "RegisterLayout":
        """Build a layout from ``(name, dim)`` pairs."""
        return cls(tuple((str(name), int(dim)) for name, dim in registers))

    @classmethod
    def qubits(cls, *names: str) -> "RegisterLayout":
        """Build a layout of qubit registers."""
        return cls.of(*[(name, 2) for name in names])

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.registers)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(dim for _, dim in self.registers)

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    @property
    def num_qubits(self) -> float:
        """log2 of the total dimension."""
        return log2(self.total_dim)

    def index(self, name: str) -> int:
        """Position of a register in the layout."""
        try:
            return self.names.index(name)
        except ValueError:
            raise LayoutError(f"Unknown register {name!r}; layout has {self.names}") from None

    def dim(self, name: str) -> int:
        return self.registers[self.index(name)][1]

    def dims_of(self, names: Iterable[str]) -> int:
        return prod(self.dim(name) for name in names)

    def contains(self, names: Iterable[str]) -> bool:
        return all(name in self.names for name in names)

    def concat(self, other: "RegisterLayout") -> "RegisterLayout":
        """Layout of the tensor product ``self ⊗ other``."""
        clash = set(self.names) & set(other.names)
        if clash:
            raise LayoutError(f"Register name collision: {sorted(clash)}")
        return RegisterLayout(self.registers + other.registers)

    def select(self, names: Sequence[str]) -> "RegisterLayout":
        """Sub-layout with the given registers, in the given order."""
        return RegisterLayout(tuple((name, self.dim(name)) for name in names))

    def without(self, names: Iterable[str]) -> "RegisterLayout":
        drop = set(names)
        for name in drop:
            self.index(name)
        return RegisterLayout(tuple(reg for reg in self.registers if reg[0] not in drop))

    def basis_index(self, values: dict) -> int:
        """
        Flat basis index for per-register values.

        Args:
            values: Mapping register name -> basis value; missing registers are 0

        Returns:
            Row-major index into the total space
        """
        unknown = set(values) - set(self.names)
        if unknown:
            raise LayoutError(f"Unknown registers {sorted(unknown)}")
        index = 0
        for name, dim in self.registers:
            value = int(values.get(name, 0))
            if not 0 <= value < dim:
                raise LayoutError(f"Value {value} out of range for register {name!r} (dim {dim})")
            index = index * dim + value
        return index

    def register_values(self, index: int) -> dict:
        """Inverse of :meth:`basis_index`."""
        values = {}
        for name, dim in reversed(self.registers):
            index, values[name] = divmod(index, dim)
        return {name: values[name] for name in self.names}
