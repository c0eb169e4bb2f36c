"""
Residual value measurements of the public-coin reduction, and CheckCoins.
"""
import logging
from typing import Dict, Hashable, Sequence, Tuple

import numpy as np

from hilbert import QuantumState
from measure import ValueMeasurement, ValueMeasurementFamily, success_operator, valest, value_grid
from memoryless import ProjectionFamily
from protocols import ProverStrategy, RepeatedProtocol, public_coin_game
from utils.errors import ProtocolError

logger = logging.getLogger(__name__)

Prefix = Tuple[Tuple[Tuple, Tuple], ...]


class ResidualMeasurements:
    """
    Cache of the measurements one public-coin run needs.

    ``family(ℓ, τ)`` is ``M^ℓ``, the value of the residual game from round ``ℓ``
    given ``τ_{ℓ−1}``; ``checkcoins(ℓ, τ, q̄, ε, δ)`` is the grid measurement of
    ``U_ℓ(q̄)† M_{τ‖q̄} U_ℓ(q̄)``.
    """

    def __init__(self, prover: ProverStrategy, protocol: RepeatedProtocol):
        if protocol.kind != "public-coin":
            raise ProtocolError("Residual measurements are defined for public-coin protocols")
        self.prover = prover
        self.protocol = protocol
        self._families: Dict[Tuple[int, Prefix], ValueMeasurementFamily] = {}
        self._checks: Dict[Tuple[int, Prefix, Tuple], ValueMeasurementFamily] = {}

    def family(self, ell: int, prefix: Prefix) -> ValueMeasurementFamily:
        key = (ell, tuple(prefix))
        if key not in self._families:
            game = public_coin_game(self.prover, self.protocol, ell, prefix)
            self._families[key] = ValueMeasurementFamily.from_game(game)
        return self._families[key]

    def checkcoins(self, ell: int, prefix: Prefix, qbar: Sequence[Hashable],
                   epsilon: float, delta: float) -> ValueMeasurement:
        key = (ell, tuple(prefix), tuple(qbar))
        if key not in self._checks:
            game = public_coin_game(self.prover, self.protocol, ell, prefix, fixed_query=tuple(qbar))
            self._checks[key] = ValueMeasurementFamily(success_operator(game), game.layout, game=game)
        return self._checks[key].at(epsilon, delta)

    def checkcoins_family(self, ell: int, prefix: Prefix, epsilon: float,
                          delta: float) -> ProjectionFamily:
        """``P = {CheckCoins_{ℓ,τ,q̄}}`` over uniform ``q̄ ∈ Q_ℓ^(k)``, sampled lazily."""
        space = self.protocol.query_space(ell)

        def sampler(rng: np.random.Generator):
            qbar = space[int(rng.integers(len(space)))]
            return qbar, self.checkcoins(ell, prefix, qbar, epsilon, delta).pvm()

        return ProjectionFamily(
            tuple(float(v) for v in value_grid(epsilon)),
            sampler=sampler,
            name=f"checkcoins[round {ell}]",
        )


def checkcoins(residuals: ResidualMeasurements, ell: int, prefix: Prefix, qbar: Sequence[Hashable],
               state: QuantumState, epsilon: float, delta: float,
               rng: np.random.Generator) -> Tuple[float, QuantumState]:
    """
    Apply ``CheckCoins_{ℓ,τ_{ℓ−1},q̄}``.

    The coherent evaluate-measure-uncompute sequence equals the projective
    measurement of the conjugated residual operator, so it is applied as one.

    Args:
        residuals: Measurement cache of the run
        ell: Round, 1-based
        prefix: Transcript ``τ_{ℓ−1}``
        qbar: k-fold query of round ``ell``
        state: Prover state
        epsilon: Grid accuracy
        delta: Failure bound
        rng: Random stream

    Returns:
        (grid value p, post-measurement state)
    """
    if not 1 <= ell <= residuals.protocol.m:
        raise ProtocolError(f"Round {ell} out of range 1..{residuals.protocol.m}")
    outcome = valest(residuals.checkcoins(ell, prefix, qbar, epsilon, delta), state, rng)
    logger.debug("CheckCoins round %d q̄=%s -> %.6f", ell, qbar, outcome.value)
    return outcome.value, outcome.post_state


def sample_embedded_query(protocol: RepeatedProtocol, ell: int, i: int, q: Hashable,
                          rng: np.random.Generator) -> Tuple[Hashable, ...]:
    """Uniform ``q̄ ∈ Q_ℓ^(k)`` conditioned on ``q̄^i = q``."""
    space = protocol.base.query_space(ell)
    qbar = [space[int(rng.integers(len(space)))] for _ in range(protocol.k)]
    qbar[i] = q
    return tuple(qbar)
