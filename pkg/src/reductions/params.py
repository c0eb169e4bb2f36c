"""
Reduction parameters: formula-derived values and desk-scale overrides.
"""
import logging
from dataclasses import dataclass
from math import ceil, log2, sqrt
from typing import Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import settings
from measure import grid_size
from memoryless import FloodingParams
from protocols import check_compatible
from utils.errors import IntractableInstanceError, ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResolvedParams:
    """Concrete numbers a reduction run uses."""

    iterations: int
    epsilon0: float
    epsilon: float
    delta: float
    eta: float
    nu: Optional[float]
    flooding_T: Optional[int]
    n_grid: int
    conformant: bool

    def to_record(self) -> dict:
        return {
            "iterations": self.iterations,
            "epsilon0": self.epsilon0,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "eta": self.eta,
            "nu": self.nu,
            "flooding_T": self.flooding_T,
            "n_grid": self.n_grid,
            "conformant": self.conformant,
        }


class ReductionParams(BaseModel):
    """
    Parameters of one reduction experiment.

    In ``paper`` mode every derived value follows the reduction's own
    formulas from ``(ξ, λ, k, m)``. In ``desk`` mode ``iterations``,
    ``epsilon0``, ``epsilon``, ``delta`` and ``eta`` are supplied directly and
    the run is flagged non-conformant; ``nu`` falls back to ``√(−log₂ξ/k)``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["public-coin", "three-message"] = Field(..., description="Reduction to run")
    mode: Literal["paper", "desk"] = Field("desk", description="Derive parameters or take them as given")
    xi: float = Field(..., gt=0, le=1, description="Assumed k-fold success probability ξ")
    lam: int = Field(1, ge=1, description="Security parameter λ")
    k: int = Field(..., ge=1, description="Number of parallel executions")
    t: int = Field(..., ge=1, description="Acceptance threshold")
    m: int = Field(1, ge=1, description="Round count of the base protocol")

    iterations: Optional[int] = Field(None, ge=1)
    epsilon0: Optional[float] = Field(None, gt=0, le=1)
    epsilon: Optional[float] = Field(None, gt=0, le=1)
    delta: Optional[float] = Field(None, gt=0, le=1)
    eta: Optional[float] = Field(None, gt=0, le=1)
    nu: Optional[float] = Field(None, ge=0)
    flooding_T: Optional[int] = Field(None, ge=1, description="Flooding rounds override")

    @model_validator(mode="before")
    @classmethod
    def _default_rounds(cls, data):
        if isinstance(data, dict) and data.get("kind") == "three-message":
            data = {**data}
            data.setdefault("m", 2)
        return data

    @model_validator(mode="after")
    def _check(self) -> "ReductionParams":
        if self.t > self.k:
            raise ValueError(f"threshold t={self.t} exceeds k={self.k}")
        if self.kind == "three-message" and self.m != 2:
            raise ValueError("three-message reductions have m = 2")
        if self.mode == "desk":
            missing = [name for name in ("iterations", "epsilon0", "epsilon", "delta", "eta")
                       if getattr(self, name) is None]
            if missing:
                raise ValueError(f"desk mode needs {missing}")
            if self.trivial_success_threshold:
                logger.warning(
                    "CheckCoins threshold ξ − (m+1)ε₀ = %.4f is not positive; every final-round check passes",
                    self.success_threshold(self.m),
                )
        return self

    @property
    def trivial_success_threshold(self) -> bool:
        """True when the last round's CheckCoins threshold ``ξ − (m+1)ε₀`` is at most 0."""
        return self.kind == "public-coin" and self.success_threshold(self.m) <= 0

    @property
    def default_nu(self) -> float:
        return sqrt(-log2(self.xi) / self.k)

    def resolved(self) -> ResolvedParams:
        """Derived parameters, recomputed on every call."""
        if self.mode == "desk":
            nu = self.nu if self.nu is not None else self.default_nu
            return ResolvedParams(
                iterations=int(self.iterations),
                epsilon0=float(self.epsilon0),
                epsilon=float(self.epsilon),
                delta=float(self.delta),
                eta=float(self.eta),
                nu=nu if self.kind == "three-message" else None,
                flooding_T=self.flooding_T,
                n_grid=grid_size(self.epsilon),
                conformant=False,
            )
        if self.kind == "public-coin":
            iterations = int(ceil(round(self.lam * self.m ** 2 / self.xi, 9)))
            epsilon0 = self.xi / self.m ** 2
            share = 1.0 / (2 * self.k * self.m * iterations)
            nu = None
        else:
            iterations = int(ceil(round(4 * self.lam / self.xi, 9)))
            epsilon0 = self.xi / 4
            share = 1.0 / (4 * self.k * iterations)
            nu = self.default_nu
        epsilon = epsilon0 / (16 * iterations)
        delta = min(2.0 ** -self.lam, 2.0 ** -self.k)
        n_grid = grid_size(epsilon)
        return ResolvedParams(
            iterations=iterations,
            epsilon0=epsilon0,
            epsilon=epsilon,
            delta=delta,
            eta=share / n_grid,
            nu=nu,
            flooding_T=None,
            n_grid=n_grid,
            conformant=True,
        )

    def flooding(self, ell: int) -> FloodingParams:
        """Flooding parameters for a prover of ``ell`` qubits."""
        r = self.resolved()
        return FloodingParams(r.epsilon, r.delta, r.eta, int(ell), T_override=r.flooding_T)

    def prepare_threshold(self, ell: int, attempt: int) -> float:
        """Prepare-abort threshold in round ``ell``, attempt ``attempt``."""
        r = self.resolved()
        if self.kind == "public-coin":
            return self.xi - ell * r.epsilon0 - (4 * attempt + 1) * r.epsilon
        return self.xi - r.epsilon0 - (4 * attempt + 1) * r.epsilon

    def success_threshold(self, ell: int) -> float:
        """CheckCoins success threshold ``ξ − (ℓ+1)ε₀``."""
        return self.xi - (ell + 1) * self.resolved().epsilon0

    def filter_threshold(self) -> float:
        """Step-2 copy filter ``ξ − ε₀``."""
        return self.xi - self.resolved().epsilon0

    def to_record(self) -> dict:
        record = self.model_dump()
        record["resolved"] = self.resolved().to_record()
        record["trivial_success_threshold"] = self.trivial_success_threshold
        return record


def check_run(prover, protocol, params: ReductionParams, kind: str,
              copies: Sequence) -> Tuple[ResolvedParams, FloodingParams]:
    """Validate a reduction run's inputs and return its resolved and flooding parameters."""
    if params.kind != kind:
        raise ParameterError(f"Parameters are for a {params.kind} reduction, not {kind}")
    if params.k != protocol.k or params.t != protocol.t:
        raise ParameterError(f"Parameters (k={params.k}, t={params.t}) do not match {protocol.name}")
    check_compatible(prover, protocol)
    resolved = params.resolved()
    if len(copies) < resolved.iterations:
        raise ParameterError(f"Need {resolved.iterations} copies of the prover state, got {len(copies)}")
    fp = params.flooding(prover.flooding_ell)
    if fp.T > settings.MAX_FLOODING_ROUNDS:
        raise IntractableInstanceError(
            f"Flooding needs T={fp.T} rounds (limit {settings.MAX_FLOODING_ROUNDS}); use desk parameters"
        )
    return resolved, fp
