"""
Threshold parallel repetition and transcripts.
"""
from dataclasses import dataclass
from itertools import product
from typing import Hashable, Optional, Sequence, Tuple, Union

from config import settings
from protocols.public_coin import PublicCoinProtocol
from protocols.three_message import ThreeMessageProtocol
from utils.errors import IntractableInstanceError, ParameterError, ProtocolError

BaseProtocol = Union[PublicCoinProtocol, ThreeMessageProtocol]


def threshold_verdict(verdicts: Sequence[int], t: int) -> int:
    """1 iff at least ``t`` of the verdict bits are set."""
    verdicts = list(verdicts)
    if not 1 <= t <= len(verdicts):
        raise ParameterError(f"Threshold {t} out of range for {len(verdicts)} verdicts")
    return int(sum(1 for v in verdicts if v) >= t)


@dataclass(frozen=True)
class Transcript:
    """
    k-fold interaction record.

    ``entries`` holds ``(q̄, z̄)`` pairs of k-tuples. Three-message transcripts
    also carry the first message ``z̄₁`` and the verifier randomness ``r̄``.
    An aborted transcript (⊥) never carries verdicts.
    """

    entries: Tuple[Tuple[Tuple, Tuple], ...] = ()
    width: int = 1
    aborted: bool = False
    verdicts: Optional[Tuple[int, ...]] = None
    first_message: Optional[Tuple[int, ...]] = None
    randomness: Optional[Tuple[Hashable, ...]] = None

    def __post_init__(self):
        if self.aborted and (self.verdicts is not None or self.entries):
            raise ProtocolError("An aborted transcript carries neither entries nor verdicts")
        for q, z in self.entries:
            if len(q) != self.width or len(z) != self.width:
                raise ProtocolError(f"Transcript entries must have width {self.width}")
        if self.verdicts is not None and len(self.verdicts) != self.width:
            raise ProtocolError(f"Verdict vector must have width {self.width}")

    @classmethod
    def bottom(cls, width: int = 1) -> "Transcript":
        return cls(width=width, aborted=True)

    def complete(self, rounds: int) -> bool:
        return not self.aborted and len(self.entries) == rounds

    def coordinate(self, i: int) -> Tuple[Tuple[Hashable, Hashable], ...]:
        """View of execution ``i``."""
        return tuple((q[i], z[i]) for q, z in self.entries)

    def to_record(self) -> dict:
        return {
            "aborted": self.aborted,
            "entries": [[list(q), list(z)] for q, z in self.entries],
            "first_message": list(self.first_message) if self.first_message is not None else None,
            "randomness": list(self.randomness) if self.randomness is not None else None,
            "verdicts": list(self.verdicts) if self.verdicts is not None else None,
        }


def _product(space: Sequence, k: int) -> Tuple[Tuple, ...]:
    size = len(space) ** k
    if size > settings.MAX_STRATEGY_SPACE:
        raise IntractableInstanceError(f"k-fold space of size {size} is too large to enumerate")
    return tuple(product(space, repeat=k))


@dataclass(frozen=True)
class RepeatedProtocol:
    """``k`` parallel copies of a base protocol accepted when at least ``t`` accept."""

    base: BaseProtocol
    k: int
    t: int

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must be positive, got {self.k}")
        if not 1 <= self.t <= self.k:
            raise ParameterError(f"Threshold t={self.t} must satisfy 1 ≤ t ≤ k={self.k}")

    @property
    def kind(self) -> str:
        return self.base.kind

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def name(self) -> str:
        return f"{self.base.name}^({self.t},{self.k})"

    # public-coin view

    def query_space(self, ell: int) -> Tuple[Tuple, ...]:
        return _product(self.base.query_space(ell), self.k)

    def response_space(self, ell: int) -> Tuple[Tuple, ...]:
        return _product(self.base.response_space(ell), self.k)

    def coordinate_accepts(self, entries: Sequence[Tuple[Tuple, Tuple]]) -> Tuple[int, ...]:
        """``Accept_i`` for every coordinate of a complete public-coin transcript."""
        entries = tuple(entries)
        return tuple(
            self.base.accept(tuple((q[i], z[i]) for q, z in entries)) for i in range(self.k)
        )

    def accept(self, entries: Sequence[Tuple[Tuple, Tuple]]) -> int:
        return threshold_verdict(self.coordinate_accepts(entries), self.t)

    # three-message view

    def randomness_space(self) -> Tuple[Tuple, ...]:
        return _product(self.base.randomness_space, self.k)

    def first_space(self) -> Tuple[Tuple, ...]:
        return _product(self.base.first_space(), self.k)

    def second_space(self) -> Tuple[Tuple, ...]:
        return _product(self.base.second_space(), self.k)

    def query_of(self, r: Sequence[Hashable], z1: Sequence[int]) -> Tuple:
        return tuple(self.base.query_of(r[i], z1[i]) for i in range(self.k))

    def coordinate_accepts_three(self, r: Sequence[Hashable],
                                 transcript: Tuple[Tuple, Tuple, Tuple]) -> Tuple[int, ...]:
        z1, q, z2 = transcript
        return tuple(self.base.accept(r[i], (z1[i], q[i], z2[i])) for i in range(self.k))

    def accept_three(self, r: Sequence[Hashable], transcript: Tuple[Tuple, Tuple, Tuple]) -> int:
        return threshold_verdict(self.coordinate_accepts_three(r, transcript), self.t)

    def transcript_accepts(self, transcript: Transcript) -> Tuple[int, ...]:
        """Per-coordinate verdicts of a complete transcript of either kind."""
        if transcript.aborted:
            raise ProtocolError("An aborted transcript has no verdicts")
        if self.kind == "public-coin":
            return self.coordinate_accepts(transcript.entries)
        (q, z2), = transcript.entries
        return self.coordinate_accepts_three(transcript.randomness, (transcript.first_message, q, z2))


def repeat(base: Union[BaseProtocol, RepeatedProtocol], k: int, t: int) -> RepeatedProtocol:
    """The ``t``-threshold ``k``-fold repetition of ``base``."""
    if isinstance(base, RepeatedProtocol):
        raise ProtocolError("Repeat the base protocol, not an already repeated one")
    return RepeatedProtocol(base, int(k), int(t))


def as_repeated(protocol: Union[BaseProtocol, RepeatedProtocol]) -> RepeatedProtocol:
    """View a base protocol as its 1-fold repetition."""
    return protocol if isinstance(protocol, RepeatedProtocol) else repeat(protocol, 1, 1)
