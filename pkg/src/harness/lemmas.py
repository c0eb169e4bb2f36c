"""
Exact numeric checks of the information-theoretic lemmas: Raz's lemma, the
classical flooding lemma and the soft-threshold lemma, plus the soft versus
hard decision comparison on the bad-correlations law.
"""
import logging
from dataclasses import dataclass
from itertools import product
from math import log2, sqrt
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config import settings
from protocols import BadCorrelationsLaw
from utils.errors import IntractableInstanceError, ParameterError

logger = logging.getLogger(__name__)

EventPredicate = Callable[[Tuple[int, ...]], bool]
MemoryMap = Union[Callable[[Tuple[int, ...]], int], np.ndarray]


@dataclass(frozen=True)
class LemmaCheck:
    """One evaluated inequality ``lhs ≤ bound``."""

    lemma: str
    lhs: float
    bound: float
    details: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.lhs <= self.bound + settings.LEMMA_SLACK

    def __iter__(self):
        return iter((self.lhs, self.bound, self.passed))

    def to_record(self) -> dict:
        return {
            "lemma": self.lemma,
            "lhs": self.lhs,
            "bound": self.bound,
            "passed": self.passed,
            "details": self.details,
        }


def _normalized(law: Sequence[float], what: str) -> np.ndarray:
    law = np.asarray(law, dtype=float)
    if law.ndim != 1 or len(law) == 0 or np.any(law < 0):
        raise ParameterError(f"{what} must be a non-empty probability vector")
    if abs(law.sum() - 1.0) > settings.PROBABILITY_SUM_TOLERANCE:
        raise ParameterError(f"{what} sums to {law.sum()}, not 1")
    return law / law.sum()


def _product_law(marginals: Sequence[np.ndarray]) -> np.ndarray:
    joint = np.ones(())
    for marginal in marginals:
        joint = np.multiply.outer(joint, marginal)
    return joint


# Raz's lemma

def raz_check(k: int, product_marginals: Sequence[Sequence[float]],
              event_predicate: Union[EventPredicate, np.ndarray]) -> LemmaCheck:
    """
    Check ``E_i TD((i, X̄|W), (i, X̄|W, X_i)) ≤ √(−log₂ Pr[W] / k)``.

    In the second distribution ``x_i`` follows its unconditioned law and the
    remaining coordinates follow the law conditioned on ``W`` and ``X_i = x_i``;
    where ``Pr[W, X_i = x_i] = 0`` they follow the product law.

    Args:
        k: Number of coordinates
        product_marginals: Law of each independent ``X_i``
        event_predicate: Callable on outcome tuples, or a boolean array over the joint space

    Returns:
        LemmaCheck with the left-hand side and the bound
    """
    if k < 1 or len(product_marginals) != k:
        raise ParameterError(f"Need {k} marginals, got {len(product_marginals)}")
    marginals = [_normalized(law, f"marginal {i}") for i, law in enumerate(product_marginals)]
    shape = tuple(len(law) for law in marginals)
    points = int(np.prod(shape))
    if points > settings.MAX_JOINT_POINTS:
        raise IntractableInstanceError(f"Joint space has {points} points")
    joint = _product_law(marginals)
    if callable(event_predicate):
        mask = np.zeros(shape, dtype=bool)
        for x in product(*(range(n) for n in shape)):
            mask[x] = bool(event_predicate(x))
    else:
        mask = np.asarray(event_predicate, dtype=bool).reshape(shape)
    weight = float(joint[mask].sum())
    if weight <= 0.0:
        raise ParameterError("The event W has probability zero")

    conditioned = np.where(mask, joint, 0.0) / weight
    total = 0.0
    for i in range(k):
        others = tuple(a for a in range(k) if a != i)
        slice_mass = conditioned.sum(axis=others, keepdims=True)
        rest = np.divide(conditioned, slice_mass, out=np.zeros_like(conditioned), where=slice_mass > 0)
        fallback = joint / joint.sum(axis=others, keepdims=True).clip(min=np.finfo(float).tiny)
        rest = np.where(slice_mass > 0, rest, fallback)
        x_i = marginals[i].reshape(tuple(n if a == i else 1 for a, n in enumerate(shape)))
        total += 0.5 * float(np.abs(conditioned - x_i * rest).sum())
    lhs = total / k
    bound = sqrt(-log2(weight) / k) if weight < 1.0 else 0.0
    return LemmaCheck("raz", lhs, bound, {"k": k, "pr_w": weight})


def all_events(shape: Sequence[int]) -> Iterable[np.ndarray]:
    """Every non-empty event over a joint space, as boolean masks."""
    points = int(np.prod(shape))
    if points > 16:
        raise IntractableInstanceError(f"2^{points} events are too many to enumerate")
    for code in range(1, 1 << points):
        bits = np.array([(code >> b) & 1 for b in range(points)], dtype=bool)
        yield bits.reshape(tuple(shape))


def raz_sweep(k: int, marginal: Sequence[float] = (0.5, 0.5)) -> List[LemmaCheck]:
    """Raz's lemma over every non-empty event for ``k`` i.i.d. coordinates."""
    shape = (len(marginal),) * k
    return [raz_check(k, [marginal] * k, event) for event in all_events(shape)]


# Flooding lemma, classical instantiation

def _flooding_distances(marginal: np.ndarray, maps: np.ndarray, t: int) -> np.ndarray:
    """Exact ``TD`` of the flooding experiment for a batch of memory maps of shape ``(B, n^t)``."""
    n = len(marginal)
    joint = _product_law([marginal] * t).reshape(-1)
    memory_values = np.unique(maps)
    distances = np.zeros(maps.shape[0])
    for j in range(t):
        for s in memory_values:
            mass = (maps == s) * joint
            # A: (ȳ_{<j}, y_j, s); B: (ȳ_{<j}, y′, s) with y′ fresh.
            a = mass.reshape(maps.shape[0], n ** j, n, n ** (t - j - 1)).sum(axis=3)
            b = a.sum(axis=2, keepdims=True) * marginal.reshape(1, 1, n)
            distances += 0.5 * np.abs(a - b).sum(axis=(1, 2))
    return distances / t


def _memory_table(memory_map: MemoryMap, n: int, t: int) -> np.ndarray:
    if callable(memory_map):
        return np.array([int(memory_map(y)) for y in product(range(n), repeat=t)])
    table = np.asarray(memory_map).reshape(-1)
    if table.size != n ** t:
        raise ParameterError(f"Memory table has {table.size} entries, expected {n ** t}")
    return table.astype(int)


def flooding_check(ell: int, t_rounds: int, marginal_law: Sequence[float],
                   memory_map: MemoryMap) -> LemmaCheck:
    """
    Check ``TD((j, ȳ_{<j}, y_j, s), (j, ȳ_{<j}, y′, s)) ≤ √(ℓ/(2t))``.

    ``y_1 … y_t`` are i.i.d. from ``marginal_law``, ``s = f(ȳ)`` is an
    ``ℓ``-bit memory, ``j`` is uniform over the rounds and ``y′`` is a fresh
    sample.

    Args:
        ell: Memory size in bits
        t_rounds: Number of rounds ``t``
        marginal_law: Law of each ``y_i``
        memory_map: Callable on ``ȳ`` or a table over ``[n]^t`` with values in ``[0, 2^ℓ)``

    Returns:
        LemmaCheck with the exact distance and the bound
    """
    if ell < 1 or t_rounds < 1:
        raise ParameterError("ell and t must be positive")
    marginal = _normalized(marginal_law, "marginal law")
    n = len(marginal)
    if n ** t_rounds > settings.MAX_JOINT_POINTS:
        raise IntractableInstanceError(f"{n}^{t_rounds} round outcomes are too many to enumerate")
    table = _memory_table(memory_map, n, t_rounds)
    if table.min() < 0 or table.max() >= 1 << ell:
        raise ParameterError(f"Memory values must fit in {ell} bits")
    lhs = float(_flooding_distances(marginal, table[None, :], t_rounds)[0])
    return LemmaCheck("flooding", lhs, sqrt(ell / (2 * t_rounds)), {"ell": ell, "t": t_rounds})


def flooding_sweep(t_rounds: int, ell: int = 1, samples: Optional[int] = None,
                   rng: Optional[np.random.Generator] = None, marginal_law: Sequence[float] = (0.5, 0.5),
                   batch: int = 1024) -> Tuple[int, int, float]:
    """
    Flooding lemma over many deterministic memory maps.

    With ``samples`` omitted every map ``[n]^t → [2^ℓ]`` is checked; otherwise
    ``samples`` uniformly random maps are.

    Returns:
        (maps checked, maps passing, worst distance)
    """
    marginal = _normalized(marginal_law, "marginal law")
    n = len(marginal)
    points = n ** t_rounds
    memory = 1 << ell
    bound = sqrt(ell / (2 * t_rounds))
    if samples is None:
        if points * ell > 16:
            raise IntractableInstanceError(f"{memory}^{points} maps are too many to enumerate")
        total = memory ** points
    else:
        if rng is None:
            raise ParameterError("Sampled sweeps need a random stream")
        total = samples
    checked = passing = 0
    worst = 0.0
    for start in range(0, total, batch):
        size = min(batch, total - start)
        if samples is None:
            codes = np.arange(start, start + size)[:, None]
            maps = (codes // memory ** np.arange(points)[None, :]) % memory
        else:
            maps = rng.integers(memory, size=(size, points))
        distances = _flooding_distances(marginal, maps, t_rounds)
        checked += size
        passing += int(np.sum(distances <= bound + settings.LEMMA_SLACK))
        worst = max(worst, float(distances.max()))
    logger.info("Flooding sweep t=%d: %d/%d maps pass, worst %.4f vs %.4f", t_rounds, passing, checked, worst, bound)
    return checked, passing, worst


# Soft-threshold lemma

def _as_joint(joint_law: Union[Mapping[Tuple[int, ...], float], np.ndarray]) -> np.ndarray:
    if isinstance(joint_law, Mapping):
        keys = list(joint_law)
        if not keys:
            raise ParameterError("Empty joint law")
        k = len(keys[0])
        law = np.zeros((2,) * k)
        for key, p in joint_law.items():
            if len(key) != k or any(b not in (0, 1) for b in key):
                raise ParameterError(f"Invalid verdict vector {key}")
            law[tuple(key)] += p
    else:
        law = np.asarray(joint_law, dtype=float)
        if law.shape != (2,) * law.ndim:
            raise ParameterError(f"Joint law must have shape (2,)*k, got {law.shape}")
    if np.any(law < 0) or abs(law.sum() - 1.0) > settings.PROBABILITY_SUM_TOLERANCE:
        raise ParameterError("Joint law must be a probability distribution")
    if law.ndim > 16:
        raise IntractableInstanceError(f"2^{law.ndim} verdict vectors are too many to enumerate")
    return law / law.sum()


def hppw_check(joint_law: Union[Mapping[Tuple[int, ...], float], np.ndarray],
               nu: float, t: int) -> LemmaCheck:
    """
    Check the soft-threshold lemma for binary ``D_1 … D_k``.

    ``W`` accepts with probability ``min(1, 2^{ν(L−t)})`` where ``L = ΣD``;
    the left-hand side is ``(1/k) Σ_i Pr[D_i = 0 | W = 1]`` and the right-hand
    side ``1 − t/k + (log₂k − log₂ε)/(kν) + 4/(ν²k²)`` with ``ε = Pr[L ≥ t]``.

    Args:
        joint_law: Mapping from verdict vectors to probabilities, or an array of shape ``(2,)*k``
        nu: Smoothness ν > 0
        t: Threshold

    Returns:
        LemmaCheck with ``lhs`` and ``rhs`` as its bound
    """
    law = _as_joint(joint_law)
    k = law.ndim
    if nu <= 0:
        raise ParameterError(f"nu must be positive, got {nu}")
    if not 1 <= t <= k:
        raise ParameterError(f"Threshold t={t} must satisfy 1 ≤ t ≤ k={k}")
    vectors = np.array(list(product((0, 1), repeat=k)))
    probs = law.reshape(-1)
    levels = vectors.sum(axis=1)
    eps = float(probs[levels >= t].sum())
    if eps <= 0.0:
        raise ParameterError("Pr[ΣD ≥ t] is zero")
    accept = np.minimum(1.0, 2.0 ** (nu * (levels - t)))
    weight = probs * accept
    lhs = float(((1 - vectors) * weight[:, None]).sum() / (k * weight.sum()))
    rhs = 1 - t / k + (log2(k) - log2(eps)) / (k * nu) + 4 / (nu * nu * k * k)
    return LemmaCheck("hppw", lhs, rhs, {"k": k, "t": t, "nu": nu, "epsilon": eps})


def random_joint_law(rng: np.random.Generator, k: int, concentration: float = 0.3) -> np.ndarray:
    """Dirichlet-distributed law on ``{0,1}^k`` with skewed, sparse mass."""
    return rng.dirichlet(np.full(1 << k, concentration)).reshape((2,) * k)


def chung_example_table(k: int, delta: float, nus: Sequence[float] = (0.5, 1.0, 2.0)) -> List[Dict]:
    """
    Conditional failure of the embedded coordinate under the bad-correlations law.

    The hard decision accepts only when all ``k − 1`` siblings accept; the soft
    decision at threshold ``t = k`` also accepts ``k − 2`` siblings with
    probability ``2^{−ν}``.

    Returns:
        One row per decision rule with ``Pr[D_i = 0 | decision accepts]``
    """
    law = BadCorrelationsLaw(k, delta)
    full = law.probabilities[0]
    single = law.probabilities[1]
    rows = [{
        "k": k,
        "delta": delta,
        "decision": "hard",
        "nu": None,
        "conditional_failure": law.conditional_failure(0),
    }]
    for nu in nus:
        soft = full + single + (k - 1) * single * 2.0 ** -nu
        rows.append({
            "k": k,
            "delta": delta,
            "decision": "soft",
            "nu": nu,
            "conditional_failure": single / soft,
        })
    return rows
