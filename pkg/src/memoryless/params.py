"""
Flooding parameters for Prepare and Repair′.
"""
from dataclasses import dataclass
from math import ceil
from typing import Optional

from config import settings
from utils.errors import ParameterError


@dataclass(frozen=True)
class FloodingParams:
    """
    ``(ε, δ, η, ℓ)`` plus everything derived from them.

    Derived values are properties, so they always agree with the inputs.
    ``T_override`` replaces ``T = ceil(4ℓ/η³)`` for exploratory runs and marks
    the parameters non-conformant.
    """

    epsilon: float
    delta: float
    eta: float
    ell: int
    T_override: Optional[int] = None

    def __post_init__(self):
        for name in ("epsilon", "delta", "eta"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ParameterError(f"{name} must lie in (0, 1], got {value}")
        if int(self.ell) < 1:
            raise ParameterError(f"ell must be a positive integer, got {self.ell}")
        if self.T_override is not None and int(self.T_override) < 1:
            raise ParameterError(f"T override must be at least 1, got {self.T_override}")

    @property
    def conformant_T(self) -> int:
        return max(1, int(ceil(round(4 * self.ell / self.eta ** 3, 9))))

    @property
    def T(self) -> int:
        return int(self.T_override) if self.T_override is not None else self.conformant_T

    @property
    def conformant(self) -> bool:
        return self.T_override is None or int(self.T_override) == self.conformant_T

    @property
    def inner_epsilon(self) -> float:
        return self.epsilon / (2 * self.T)

    @property
    def inner_delta(self) -> float:
        return self.delta ** 2 / (64 * self.T ** 2)

    @property
    def inner_eta(self) -> float:
        return self.eta / (2 * self.T)

    def oracle_call_limit(self, constant: Optional[int] = None) -> float:
        """``c·(T + T²/η)`` with ``c = settings.ORACLE_CALL_CONSTANT`` unless given."""
        constant = settings.ORACLE_CALL_CONSTANT if constant is None else constant
        return constant * (self.T + self.T ** 2 / self.eta)

    def to_record(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "eta": self.eta,
            "ell": self.ell,
            "T": self.T,
            "conformant": self.conformant,
        }
