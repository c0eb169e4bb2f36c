"""
Single-fold verifier sessions the reductions talk to.
"""
import logging
from typing import Hashable, List, Optional, Sequence, Tuple

import numpy as np

from protocols import PublicCoinProtocol, ThreeMessageProtocol
from utils.errors import ProtocolError

logger = logging.getLogger(__name__)


class PublicCoinVerifier:
    """Live single-fold public-coin verifier drawing uniform queries."""

    def __init__(self, protocol: PublicCoinProtocol, rng: np.random.Generator):
        """
        Initialize the session.

        Args:
            protocol: Base public-coin protocol
            rng: Stream for the verifier's coins
        """
        if protocol.kind != "public-coin":
            raise ProtocolError(f"{protocol.name} is not public-coin")
        self.protocol = protocol
        self.rng = rng
        self.entries: List[Tuple[Hashable, int]] = []
        self._pending: Optional[Hashable] = None

    def _draw(self, ell: int) -> Hashable:
        space = self.protocol.query_space(ell)
        return space[int(self.rng.integers(len(space)))]

    def next_query(self) -> Hashable:
        """Send the next round's query."""
        if self._pending is not None:
            raise ProtocolError("Previous query has not been answered")
        ell = len(self.entries) + 1
        if ell > self.protocol.m:
            raise ProtocolError("All rounds have been played")
        self._pending = self._draw(ell)
        return self._pending

    def respond(self, z: int) -> None:
        if self._pending is None:
            raise ProtocolError("No outstanding query to respond to")
        self.entries.append((self._pending, int(z)))
        self._pending = None

    @property
    def complete(self) -> bool:
        return len(self.entries) == self.protocol.m

    def verdict(self) -> int:
        if not self.complete:
            raise ProtocolError("Verdict requested before the interaction completed")
        return self.protocol.accept(self.entries)


class ThreeMessageVerifier:
    """Live single-fold three-message verifier with private randomness ``r``."""

    def __init__(self, protocol: ThreeMessageProtocol, rng: np.random.Generator):
        if protocol.kind != "three-message":
            raise ProtocolError(f"{protocol.name} is not three-message")
        self.protocol = protocol
        self.randomness = self._draw(rng)
        self.first: Optional[int] = None
        self.query: Optional[Hashable] = None
        self.second: Optional[int] = None

    def _draw(self, rng: np.random.Generator) -> Hashable:
        space = self.protocol.randomness_space
        return space[int(rng.integers(len(space)))]

    def receive_first(self, z1: int) -> Hashable:
        """Take the prover's first message and answer with the query."""
        if self.first is not None:
            raise ProtocolError("First message already received")
        self.first = int(z1)
        self.query = self.protocol.query_of(self.randomness, self.first)
        return self.query

    def respond(self, z2: int) -> None:
        if self.query is None or self.second is not None:
            raise ProtocolError("Second message is out of order")
        self.second = int(z2)

    @property
    def complete(self) -> bool:
        return self.second is not None

    def verdict(self) -> int:
        if not self.complete:
            raise ProtocolError("Verdict requested before the interaction completed")
        return self.protocol.accept(self.randomness, (self.first, self.query, self.second))


class ScriptedVerifier(PublicCoinVerifier, ThreeMessageVerifier):
    """
    Replays recorded verifier behaviour.

    Public-coin scripts list the query of every round; three-message scripts
    hold the single randomness value ``r``.
    """

    def __init__(self, protocol, script: Sequence[Hashable]):
        self.protocol = protocol
        self.script = tuple(script)
        if protocol.kind == "public-coin":
            if len(self.script) != protocol.m:
                raise ProtocolError(f"Script needs {protocol.m} queries, got {len(self.script)}")
            self.entries = []
            self._pending = None
        else:
            if len(self.script) != 1 or self.script[0] not in protocol.randomness_space:
                raise ProtocolError("Three-message scripts hold one randomness value")
            self.randomness = self.script[0]
            self.first = None
            self.query = None
            self.second = None

    def _draw(self, ell: int) -> Hashable:
        return self.script[ell - 1]

    @property
    def complete(self) -> bool:
        if self.protocol.kind == "public-coin":
            return len(self.entries) == self.protocol.m
        return self.second is not None

    def verdict(self) -> int:
        if self.protocol.kind == "public-coin":
            return PublicCoinVerifier.verdict(self)
        return ThreeMessageVerifier.verdict(self)

    def respond(self, z: int) -> None:
        if self.protocol.kind == "public-coin":
            PublicCoinVerifier.respond(self, z)
        else:
            ThreeMessageVerifier.respond(self, z)


def open_session(protocol, rng: np.random.Generator):
    """Live session matching the protocol kind."""
    if protocol.kind == "public-coin":
        return PublicCoinVerifier(protocol, rng)
    return ThreeMessageVerifier(protocol, rng)
