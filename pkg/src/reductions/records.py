"""
Run records of the reductions.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, List, Optional, Tuple

from protocols import Transcript


class AbortCause(str, Enum):
    """Why a reduction returned ``(i, ⊥)``."""

    STEP2_EXHAUSTED = "step2-exhausted"
    PREPARE_LOW = "prepare-low"
    CHECKCOINS_EXHAUSTED = "checkcoins-exhausted"
    SOFTDECISION_EXHAUSTED = "softdecision-exhausted"


@dataclass
class AttemptLog:
    """
    One iteration of the inner loop.

    ``p_check`` holds the CheckCoins value (public-coin) or the SoftDecisionProj
    bit (three-message).
    """

    attempt: int
    query: Tuple[Hashable, ...]
    p_value: float
    p_prepare: float
    threshold: float
    p_check: Optional[float] = None
    success: bool = False
    prepare_rounds: int = 0
    repair_rounds: Optional[int] = None
    oracle_calls: int = 0
    oracle_limit_ok: bool = True
    decision_index: Optional[int] = None
    randomness: Optional[Tuple[Hashable, ...]] = None
    omega: Optional[int] = None

    def to_record(self) -> dict:
        return {
            "attempt": self.attempt,
            "query": list(self.query),
            "p_values": [self.p_value, self.p_prepare] + ([self.p_check] if self.p_check is not None else []),
            "threshold": self.threshold,
            "success": self.success,
            "prepare_rounds": self.prepare_rounds,
            "repair_rounds": self.repair_rounds,
            "oracle_calls": self.oracle_calls,
            "oracle_limit_ok": self.oracle_limit_ok,
            "decision_index": self.decision_index,
            "randomness": list(self.randomness) if self.randomness is not None else None,
            "omega": self.omega,
        }


@dataclass
class RoundLog:
    """All attempts of one round plus the forwarded response."""

    round: int
    external_query: Optional[Hashable] = None
    attempts: List[AttemptLog] = field(default_factory=list)
    response: Optional[Tuple[int, ...]] = None
    p_after: Optional[float] = None

    def to_record(self) -> dict:
        return {
            "round": self.round,
            "external_query": self.external_query,
            "attempts": [a.to_record() for a in self.attempts],
            "response": list(self.response) if self.response is not None else None,
            "p_after": self.p_after,
        }


@dataclass
class ReductionRunRecord:
    """Everything one reduction run did, and how it ended."""

    kind: str
    i: int
    seed: Optional[int] = None
    decision: str = "soft"
    step2_attempts: int = 0
    p0: Optional[float] = None
    rounds: List[RoundLog] = field(default_factory=list)
    transcript: Optional[Transcript] = None
    abort_cause: Optional[AbortCause] = None
    verdicts: Optional[Tuple[int, ...]] = None
    external_verdict: Optional[int] = None
    params: Optional[dict] = None

    @property
    def completed(self) -> bool:
        return self.abort_cause is None and self.transcript is not None and not self.transcript.aborted

    @property
    def oracle_limit_violations(self) -> int:
        """Number of Prepare or Repair′ calls that ran past their oracle-call limit."""
        return sum(not a.oracle_limit_ok for r in self.rounds for a in r.attempts)

    def abort(self, cause: AbortCause, width: int) -> "ReductionRunRecord":
        self.abort_cause = cause
        self.transcript = Transcript.bottom(width)
        return self

    def to_record(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "i": self.i,
            "decision": self.decision,
            "step2_attempts": self.step2_attempts,
            "p0": self.p0,
            "abort_cause": self.abort_cause.value if self.abort_cause is not None else None,
            "oracle_limit_violations": self.oracle_limit_violations,
            "rounds": [r.to_record() for r in self.rounds],
            "transcript": self.transcript.to_record() if self.transcript is not None else None,
            "verdicts": list(self.verdicts) if self.verdicts is not None else None,
            "external_verdict": self.external_verdict,
            "params": self.params,
        }
