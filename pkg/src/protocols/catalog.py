"""
Toy protocol catalog with closed-form soundness, addressable by name.
"""
from math import prod
from typing import Callable, Dict, Sequence, Union

from protocols.public_coin import PublicCoinProtocol
from protocols.three_message import ThreeMessageProtocol
from utils.errors import CatalogError, ParameterError


def always_accept(m: int = 1) -> PublicCoinProtocol:
    """m-round protocol accepting every transcript."""
    if m < 1:
        raise ParameterError(f"m must be positive, got {m}")
    return PublicCoinProtocol(
        name=f"always-accept(m={m})",
        query_spaces=((0,),) * m,
        response_dims=(1,) * m,
        accept_fn=lambda entries: 1,
        soundness=1.0,
    )


def subset(n: int, s: int) -> PublicCoinProtocol:
    """One round: accept iff the coin ``q ∈ [n]`` lands in ``S = {0, …, s−1}``."""
    if not 0 <= s <= n or n < 1:
        raise ParameterError(f"subset game needs 0 ≤ s ≤ n, got n={n}, s={s}")
    return PublicCoinProtocol(
        name=f"subset(n={n},s={s})",
        query_spaces=(tuple(range(n)),),
        response_dims=(1,),
        accept_fn=lambda entries: int(entries[0][0] < s),
        soundness=s / n,
    )


def chained_subset(n: int, sizes: Sequence[int]) -> PublicCoinProtocol:
    """``len(sizes)`` rounds of the subset game; accept iff every round lands in its subset."""
    sizes = tuple(int(s) for s in sizes)
    if not sizes or n < 1 or any(not 0 <= s <= n for s in sizes):
        raise ParameterError(f"chained subset game needs 0 ≤ s ≤ n in every round, got {sizes}")
    return PublicCoinProtocol(
        name=f"chained-subset(n={n},sizes={list(sizes)})",
        query_spaces=(tuple(range(n)),) * len(sizes),
        response_dims=(1,) * len(sizes),
        accept_fn=lambda entries: int(all(q < s for (q, _), s in zip(entries, sizes))),
        soundness=prod(s / n for s in sizes),
    )


def parity(n: int = 2) -> PublicCoinProtocol:
    """One round: accept iff the response bit equals ``q mod 2``."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    return PublicCoinProtocol(
        name=f"parity(n={n})",
        query_spaces=(tuple(range(n)),),
        response_dims=(2,),
        accept_fn=lambda entries: int(entries[0][1] == entries[0][0] % 2),
        soundness=1.0,
    )


def preimage(n: int, w: int) -> ThreeMessageProtocol:
    """
    Lossy-preimage game.

    The verifier draws ``r ∈ [n]``, sends ``q = r mod w`` and accepts iff
    ``z₂ = r``. The best guess wins once per query value, so the soundness is
    ``w/n``.
    """
    if not 1 <= w <= n:
        raise ParameterError(f"preimage game needs 1 ≤ w ≤ n, got n={n}, w={w}")
    return ThreeMessageProtocol(
        name=f"preimage(n={n},w={w})",
        randomness_space=tuple(range(n)),
        first_dim=1,
        second_dim=n,
        query_fn=lambda r, z1: r % w,
        accept_fn=lambda r, transcript: int(transcript[2] == r),
        soundness=w / n,
    )


def programmable(n: int = 4) -> ThreeMessageProtocol:
    """Verdict-programmable game: ``q = r ∈ [n]`` and the verdict is the prover's token bit ``z₂``."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    return ThreeMessageProtocol(
        name=f"programmable(n={n})",
        randomness_space=tuple(range(n)),
        first_dim=1,
        second_dim=2,
        query_fn=lambda r, z1: r,
        accept_fn=lambda r, transcript: int(transcript[2] == 1),
        soundness=1.0,
    )


CATALOG: Dict[str, Callable[..., Union[PublicCoinProtocol, ThreeMessageProtocol]]] = {
    "always-accept": always_accept,
    "subset": subset,
    "chained-subset": chained_subset,
    "parity": parity,
    "preimage": preimage,
    "programmable": programmable,
}


def resolve(name: str, **params) -> Union[PublicCoinProtocol, ThreeMessageProtocol]:
    """
    Build a catalog protocol from its name and parameters.

    Args:
        name: Catalog entry, e.g. ``"subset"``
        params: Builder keyword arguments, e.g. ``n=8, s=2``

    Returns:
        The protocol instance
    """
    builder = CATALOG.get(name)
    if builder is None:
        raise CatalogError(f"Unknown protocol {name!r}; available: {sorted(CATALOG)}")
    try:
        return builder(**params)
    except TypeError as e:
        raise CatalogError(f"Bad parameters {params} for protocol {name!r}: {e}") from e
