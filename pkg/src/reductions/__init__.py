"""Reductions from k-fold threshold soundness to single-fold soundness."""
from .params import ReductionParams, ResolvedParams, check_run
from .records import AbortCause, AttemptLog, RoundLog, ReductionRunRecord
from .session import PublicCoinVerifier, ThreeMessageVerifier, ScriptedVerifier, open_session
from .checkcoins import ResidualMeasurements, checkcoins, sample_embedded_query
from .softdecision import (
    OMEGA_BITS,
    OMEGA_SPACE,
    DECISIONS,
    SoftDecisionProjections,
    acceptance_probability,
    complete_randomness,
    sibling_level,
    softdecision,
    softdecision_proj,
    sample_omega,
)
from .public_coin import run_public_coin_reduction
from .three_message import run_three_message_reduction
from .deferred import DeferredMeasurementResult, deferred_measurement_check

__all__ = [
    "ReductionParams",
    "ResolvedParams",
    "check_run",
    "AbortCause",
    "AttemptLog",
    "RoundLog",
    "ReductionRunRecord",
    "PublicCoinVerifier",
    "ThreeMessageVerifier",
    "ScriptedVerifier",
    "open_session",
    "ResidualMeasurements",
    "checkcoins",
    "sample_embedded_query",
    "OMEGA_BITS",
    "OMEGA_SPACE",
    "DECISIONS",
    "SoftDecisionProjections",
    "acceptance_probability",
    "complete_randomness",
    "sibling_level",
    "softdecision",
    "softdecision_proj",
    "sample_omega",
    "run_public_coin_reduction",
    "run_three_message_reduction",
    "DeferredMeasurementResult",
    "deferred_measurement_check",
]
