"""
Reproducible random streams.

Every stream is a Philox (counter-based) generator keyed by a 64-bit master
seed plus a spawn key such as ``(trial, step)``, so runs are bitwise
reproducible regardless of scheduling.
"""
from typing import Sequence

import numpy as np

MASK_64 = (1 << 64) - 1


def make_rng(master_seed: int, *key: int) -> np.random.Generator:
    """
    Derive a generator for ``(master_seed, *key)``.

    Args:
        master_seed: Experiment-level seed (reduced modulo 2**64)
        key: Spawn key, e.g. trial index then step counter

    Returns:
        A Philox-backed numpy Generator
    """
    seq = np.random.SeedSequence(
        entropy=int(master_seed) & MASK_64,
        spawn_key=tuple(int(k) for k in key),
    )
    return np.random.Generator(np.random.Philox(seq))


def trial_seeds(master_seed: int, trials: int) -> Sequence[int]:
    """Derive one 64-bit seed per trial from the master seed."""
    seq = np.random.SeedSequence(entropy=int(master_seed) & MASK_64)
    words = seq.generate_state(2 * trials, dtype=np.uint32).reshape(trials, 2)
    return [int(hi) << 32 | int(lo) for hi, lo in words]
