"""
Soundness bound calculators for threshold parallel repetition.
"""
from dataclasses import dataclass
from math import ceil, exp, log2, sqrt
from typing import Dict, List, Optional, Sequence, Tuple

from utils.errors import ParameterError

VARIANTS = ("full", "threshold")


@dataclass(frozen=True)
class BoundValue:
    """
    A bound formula evaluated as written.

    ``value`` is never clamped; ``vacuous`` marks values that say nothing
    (``≥ 1`` for soundness bounds, ``≤ 0`` for guarantees) or whose
    precondition fails.
    """

    name: str
    value: float
    vacuous: bool
    precondition: bool = True
    note: Optional[str] = None

    @property
    def clamped(self) -> float:
        return min(1.0, max(0.0, self.value))

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "vacuous": self.vacuous,
            "precondition": self.precondition,
            "note": self.note,
        }


def _check_threshold(k: int, t: int) -> None:
    if k < 1 or not 1 <= t <= k:
        raise ParameterError(f"Need 1 ≤ t ≤ k, got t={t}, k={k}")


def bound_public(epsilon: float, m: int, k: int, t: int) -> BoundValue:
    """``6m² · exp(−k/(4m²) · (t/k − ε)²)``, valid when ``ε < t/k``."""
    _check_threshold(k, t)
    if m < 1:
        raise ParameterError(f"m must be positive, got {m}")
    precondition = epsilon < t / k
    value = 6 * m * m * exp(-k / (4 * m * m) * (t / k - epsilon) ** 2)
    return BoundValue("public-coin", value, vacuous=(not precondition or value >= 1.0),
                      precondition=precondition, note="negligible term dropped")


def three_message_margin(k: int, t: int) -> float:
    """``t/k − 2·log₂k/√k``: the largest single-fold soundness the three-message bound covers."""
    return t / k - 2 * log2(k) / sqrt(k)


def bound_three(epsilon: float, k: int, t: int) -> BoundValue:
    """``2 · exp(−k/9 · ((t − 2√k·log₂k)/k − ε)²)``, valid when ``ε < t/k − 2log₂k/√k``."""
    _check_threshold(k, t)
    precondition = epsilon < three_message_margin(k, t)
    value = 2 * exp(-k / 9 * ((t - 2 * sqrt(k) * log2(k)) / k - epsilon) ** 2)
    return BoundValue("three-message", value, vacuous=(not precondition or value >= 1.0),
                      precondition=precondition, note="negligible term dropped")


def bound_informal(s: float, k: int, m: int = 1, t: Optional[int] = None,
                   variant: str = "full") -> BoundValue:
    """
    Unit-constant informal bound ``f(s)^{k/m²}``.

    ``f(s) = 2^{−(1−s)²}`` for full repetition and ``2^{−(t/k−s)²}`` for the
    threshold variant; the unstated constant in the exponent is fixed to 1.
    """
    if variant not in VARIANTS:
        raise ParameterError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if not 0.0 <= s <= 1.0:
        raise ParameterError(f"s must lie in [0, 1], got {s}")
    if k < 1 or m < 1:
        raise ParameterError("k and m must be positive")
    if variant == "threshold":
        if t is None:
            raise ParameterError("The threshold variant needs t")
        _check_threshold(k, t)
        gap = t / k - s
        precondition = gap >= 0
    else:
        gap = 1.0 - s
        precondition = True
    value = (2.0 ** -(gap * gap)) ** (k / (m * m))
    return BoundValue(f"informal-{variant}", value, vacuous=(not precondition or value >= 1.0),
                      precondition=precondition, note="unit-constant informal bound")


def public_guarantee(xi: float, m: int, k: int, t: int) -> BoundValue:
    """Single-fold success the public-coin reduction guarantees: ``t/k − 2m·√(−log₂(ξ/3m²)/k)``."""
    _check_threshold(k, t)
    if not 0.0 < xi <= 1.0:
        raise ParameterError(f"xi must lie in (0, 1], got {xi}")
    value = t / k - 2 * m * sqrt(-log2(xi / (3 * m * m)) / k)
    return BoundValue("public-coin-guarantee", value, vacuous=value <= 0.0)


def three_guarantee(xi: float, k: int, t: int) -> BoundValue:
    """Single-fold success the three-message reduction guarantees: ``t/k − 2·log₂k/√k − 3·√(−log₂ξ/k)``."""
    _check_threshold(k, t)
    if not 0.0 < xi <= 1.0:
        raise ParameterError(f"xi must lie in (0, 1], got {xi}")
    value = three_message_margin(k, t) - 3 * sqrt(-log2(xi) / k)
    return BoundValue("three-message-guarantee", value, vacuous=value <= 0.0)


def bound_table(epsilon: float, ks: Sequence[int], ratios: Sequence[float], m: int = 1,
                variant: str = "full") -> List[Dict]:
    """
    Corollary and informal bounds over a ``(k, t = ⌈ratio·k⌉)`` grid.

    Returns:
        One row per grid point
    """
    rows = []
    for k in ks:
        for ratio in ratios:
            t = max(1, min(k, ceil(round(ratio * k, 9))))
            public = bound_public(epsilon, m, k, t)
            three = bound_three(epsilon, k, t)
            informal = bound_informal(epsilon, k, m, t, variant)
            rows.append({
                "k": k,
                "t": t,
                "m": m,
                "epsilon": epsilon,
                "public": public.to_record(),
                "three": three.to_record(),
                "informal": informal.to_record(),
            })
    return rows


def increases_in_k(epsilon: float, ks: Sequence[int], ratios: Sequence[float],
                   m: int = 1) -> List[Tuple[str, float, int, int]]:
    """
    Grid points where a corollary bound grows from one ``k`` to the next.

    Only consecutive points whose preconditions both hold are compared, at a
    fixed ``t/k`` ratio.

    Returns:
        ``(bound, ratio, k_before, k_after)`` for each increase
    """
    increases = []
    for ratio in ratios:
        line = bound_table(epsilon, sorted(ks), [ratio], m)
        for key in ("public", "three"):
            for before, after in zip(line, line[1:]):
                if not (before[key]["precondition"] and after[key]["precondition"]):
                    continue
                if after[key]["value"] > before[key]["value"] * (1 + 1e-12):
                    increases.append((key, ratio, before["k"], after["k"]))
    return increases
