"""
Three-message private-coin arguments.
"""
from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence, Tuple

from utils.errors import ProtocolError


@dataclass(frozen=True)
class ThreeMessageProtocol:
    """
    Prover sends ``z₁``, verifier answers ``q = query_of(r, z₁)``, prover sends ``z₂``.

    The verdict needs the private randomness ``r``; it is only evaluated on
    transcripts whose ``q`` matches ``query_of(r, z₁)``.
    """

    name: str
    randomness_space: Tuple[Hashable, ...]
    first_dim: int
    second_dim: int
    query_fn: Callable[[Hashable, int], Hashable]
    accept_fn: Callable[[Hashable, Tuple[int, Hashable, int]], int]
    soundness: Optional[float] = None

    def __post_init__(self):
        space = tuple(self.randomness_space)
        if not space:
            raise ProtocolError("Randomness space must be non-empty")
        if int(self.first_dim) < 1 or int(self.second_dim) < 1:
            raise ProtocolError("Message dimensions must be positive")
        object.__setattr__(self, "randomness_space", space)

    kind = "three-message"
    m = 2

    def first_space(self) -> Sequence[int]:
        return range(self.first_dim)

    def second_space(self) -> Sequence[int]:
        return range(self.second_dim)

    def query_of(self, r: Hashable, z1: int) -> Hashable:
        return self.query_fn(r, z1)

    def query_space(self) -> Tuple[Hashable, ...]:
        """Every query some ``(r, z₁)`` produces, in first-seen order."""
        seen = {}
        for z1 in self.first_space():
            for r in self.randomness_space:
                seen.setdefault(self.query_of(r, z1), None)
        return tuple(seen)

    def accept(self, r: Hashable, transcript: Tuple[int, Hashable, int]) -> int:
        z1, q, z2 = transcript
        if q != self.query_of(r, z1):
            raise ProtocolError(f"Query {q!r} is inconsistent with randomness {r!r} in {self.name}")
        return int(bool(self.accept_fn(r, (z1, q, z2))))
