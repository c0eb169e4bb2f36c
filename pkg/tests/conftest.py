import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "src"))
sys.path.insert(0, ROOT)

from hilbert import QuantumState, RegisterLayout  # noqa: E402
from utils.rng import make_rng  # noqa: E402


@pytest.fixture
def rng():
    return make_rng(20240607)


@pytest.fixture
def rng_factory():
    """Independent streams keyed by a small integer."""
    return lambda *key: make_rng(20240607, *key)


def random_pure(layout: RegisterLayout, rng: np.random.Generator) -> QuantumState:
    vec = rng.normal(size=layout.total_dim) + 1j * rng.normal(size=layout.total_dim)
    return QuantumState.pure(layout, vec / np.linalg.norm(vec))


def random_density(layout: RegisterLayout, rng: np.random.Generator) -> QuantumState:
    g = rng.normal(size=(layout.total_dim,) * 2) + 1j * rng.normal(size=(layout.total_dim,) * 2)
    rho = g @ g.conj().T
    return QuantumState.mixed(layout, rho / np.trace(rho).real)
