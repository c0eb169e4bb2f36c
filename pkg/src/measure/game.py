"""
Games: a verifier predicate plus an adversary circuit, and their success operator.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence, Tuple

import numpy as np

from config import settings
from hilbert import QuantumState, RegisterLayout, Unitary, apply_operator
from utils.errors import IntractableInstanceError, LayoutError, ProtocolError

logger = logging.getLogger(__name__)

Coin = Hashable
Response = Tuple[int, ...]


@dataclass(frozen=True)
class GameSpec:
    """
    Verifier predicate ``V(r, z)`` and adversary ``A_r`` over a register layout.

    The adversary unitary for coin ``r`` may act on any subset of the layout's
    registers; the response ``z`` is the tuple of computational-basis values of
    ``response_registers`` (empty for games that ignore the prover).
    """

    layout: RegisterLayout
    coins: Tuple[Coin, ...]
    verdict: Callable[[Coin, Response], int]
    adversary: Optional[Callable[[Coin], Optional[Unitary]]] = None
    response_registers: Tuple[str, ...] = ()
    name: str = "game"

    def __post_init__(self):
        coins = tuple(self.coins)
        if not coins:
            raise ProtocolError("A game needs at least one coin string")
        if len(coins) > settings.MAX_COIN_STRINGS:
            raise IntractableInstanceError(
                f"{len(coins)} coin strings exceed the enumeration limit {settings.MAX_COIN_STRINGS}"
            )
        responses = tuple(self.response_registers)
        if not self.layout.contains(responses):
            raise LayoutError(f"Response registers {responses} are not in {self.layout.names}")
        object.__setattr__(self, "coins", coins)
        object.__setattr__(self, "response_registers", responses)

    @classmethod
    def deterministic(cls, layout: RegisterLayout, bit: int) -> "GameSpec":
        """Game with no coins and no response whose verdict is the constant ``bit``."""
        return cls(layout, ((),), lambda r, z: int(bit), name=f"constant-{int(bit)}")

    @property
    def randomness_dim(self) -> int:
        return len(self.coins)

    def adversary_matrix(self, coin: Coin) -> Optional[np.ndarray]:
        """Full-layout matrix of ``A_r`` (``None`` for the identity)."""
        if self.adversary is None:
            return None
        u = self.adversary(coin)
        if u is None:
            return None
        if not self.layout.contains(u.layout.names):
            raise LayoutError(f"Adversary acts on {u.layout.names}, outside {self.layout.names}")
        return u.on(self.layout)

    def response_table(self) -> np.ndarray:
        """Row ``j`` holds the response-register values of basis state ``j``."""
        positions = [self.layout.index(name) for name in self.response_registers]
        if not positions:
            return np.zeros((self.layout.total_dim, 0), dtype=int)
        digits = np.unravel_index(np.arange(self.layout.total_dim), self.layout.dims)
        return np.stack([digits[p] for p in positions], axis=1)

    def acceptance_mask(self, coin: Coin, table: Optional[np.ndarray] = None) -> np.ndarray:
        """Diagonal of ``Π_acc,r`` over the full basis."""
        table = self.response_table() if table is None else table
        cache = {}
        mask = np.empty(len(table), dtype=float)
        for index, row in enumerate(table):
            z = tuple(int(v) for v in row)
            if z not in cache:
                cache[z] = 1.0 if self.verdict(coin, z) else 0.0
            mask[index] = cache[z]
        return mask


def success_operator(game: GameSpec) -> np.ndarray:
    """
    Assemble ``M = (1/|R|) Σ_r A_r† Π_acc,r A_r``.

    Args:
        game: Game whose coins are enumerated

    Returns:
        Hermitian matrix on the game's layout
    """
    dim = game.layout.total_dim
    table = game.response_table()
    total = np.zeros((dim, dim), dtype=complex)
    for coin in game.coins:
        mask = game.acceptance_mask(coin, table)
        u = game.adversary_matrix(coin)
        if u is None:
            total += np.diag(mask)
        else:
            total += (u.conj().T * mask) @ u
    total /= game.randomness_dim
    logger.debug("Assembled success operator for %s over %d coins", game.name, game.randomness_dim)
    return (total + total.conj().T) / 2


def play_once(game: GameSpec, state: QuantumState, rng: np.random.Generator) -> int:
    """
    Run the literal protocol once: sample ``r``, apply ``A_r``, measure ``z``, evaluate ``V``.

    Returns:
        The verdict bit
    """
    coin = game.coins[int(rng.integers(game.randomness_dim))]
    u = game.adversary_matrix(coin)
    current = state if u is None else apply_operator(state, u)
    probs = current.diagonal()
    index = int(rng.choice(len(probs), p=probs / probs.sum()))
    z = decode_response(game, index)
    return int(bool(game.verdict(coin, z)))


def decode_response(game: GameSpec, index: int) -> Response:
    """Response tuple carried by basis state ``index``."""
    values = game.layout.register_values(index)
    return tuple(values[name] for name in game.response_registers)


def coin_strings(bits: int) -> Sequence[Tuple[int, ...]]:
    """All coin strings of ``bits`` bits, as tuples."""
    return [tuple((value >> (bits - 1 - b)) & 1 for b in range(bits)) for value in range(1 << bits)]
