"""
Public-coin multi-round arguments.
"""
from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence, Tuple

from utils.errors import ProtocolError

Entry = Tuple[Hashable, Hashable]


@dataclass(frozen=True)
class PublicCoinProtocol:
    """
    ``m``-round protocol whose verifier messages are uniform coins.

    Responses in round ``ℓ`` are integers in ``range(response_dims[ℓ-1])``;
    ``accept`` maps the full transcript ``((q₁, z₁), …, (q_m, z_m))`` to a bit.
    """

    name: str
    query_spaces: Tuple[Tuple[Hashable, ...], ...]
    response_dims: Tuple[int, ...]
    accept_fn: Callable[[Tuple[Entry, ...]], int]
    soundness: Optional[float] = None

    def __post_init__(self):
        spaces = tuple(tuple(space) for space in self.query_spaces)
        if not spaces:
            raise ProtocolError("A protocol needs at least one round")
        if any(len(space) < 1 for space in spaces):
            raise ProtocolError(f"Every query space must be non-empty in {self.name}")
        if len(self.response_dims) != len(spaces):
            raise ProtocolError("One response dimension per round is required")
        if any(int(d) < 1 for d in self.response_dims):
            raise ProtocolError("Response dimensions must be positive")
        object.__setattr__(self, "query_spaces", spaces)
        object.__setattr__(self, "response_dims", tuple(int(d) for d in self.response_dims))

    kind = "public-coin"

    @property
    def m(self) -> int:
        return len(self.query_spaces)

    def query_space(self, ell: int) -> Sequence[Hashable]:
        return self.query_spaces[ell - 1]

    def response_space(self, ell: int) -> Sequence[int]:
        return range(self.response_dims[ell - 1])

    def accept(self, entries: Sequence[Entry]) -> int:
        entries = tuple(entries)
        if len(entries) != self.m:
            raise ProtocolError(f"{self.name} needs {self.m} rounds, transcript has {len(entries)}")
        return int(bool(self.accept_fn(entries)))
