"""
Configuration settings for the parallel-repetition simulator.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
env_path = Path(__file__).parent.parent / '.env'
load_dotenv(dotenv_path=env_path)


def _env_float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


class Settings:
    """Simulator settings, overridable through QPR_* environment variables."""

    # Numerical tolerances
    NORM_TOLERANCE: float = _env_float("QPR_NORM_TOLERANCE", 1e-10)
    HERMITIAN_TOLERANCE: float = _env_float("QPR_HERMITIAN_TOLERANCE", 1e-10)
    PROJECTOR_TOLERANCE: float = _env_float("QPR_PROJECTOR_TOLERANCE", 1e-8)
    UNITARY_TOLERANCE: float = _env_float("QPR_UNITARY_TOLERANCE", 1e-8)
    EIGENVALUE_CLAMP: float = _env_float("QPR_EIGENVALUE_CLAMP", 1e-8)
    PROBABILITY_FLOOR: float = _env_float("QPR_PROBABILITY_FLOOR", 1e-12)
    PROBABILITY_SUM_TOLERANCE: float = _env_float("QPR_PROBABILITY_SUM_TOLERANCE", 1e-9)
    LEMMA_SLACK: float = _env_float("QPR_LEMMA_SLACK", 1e-9)
    PRUNE_PROBABILITY: float = _env_float("QPR_PRUNE_PROBABILITY", 1e-12)
    VALUE_MATCH_SLACK: float = _env_float("QPR_VALUE_MATCH_SLACK", 1e-12)

    # Size limits for dense representations
    MAX_PURE_DIM: int = 4096
    MAX_MIXED_DIM: int = 256
    MAX_COIN_STRINGS: int = 1 << 12
    MAX_STRATEGY_SPACE: int = 10 ** 7
    MAX_BRANCHES: int = 10 ** 6
    MAX_ENUMERATED_FAMILY: int = 8
    MAX_JOINT_POINTS: int = 1 << 16
    MAX_FLOODING_ROUNDS: int = _env_int("QPR_MAX_FLOODING_ROUNDS", 10 ** 4)

    # Repair and flooding constants
    REPAIR_BUDGET_CONSTANT: int = _env_int("QPR_REPAIR_BUDGET_CONSTANT", 4)
    ORACLE_CALL_CONSTANT: int = _env_int("QPR_ORACLE_CALL_CONSTANT", 8)

    # Statistics
    WILSON_Z: float = 1.959963984540054
    MIN_TRIALS_FOR_INTERVAL: int = 30
    SAMPLING_BATCHES: int = 20

    # Experiments
    DEFAULT_SEED: int = _env_int("QPR_DEFAULT_SEED", 20240607)
    RESULTS_DIR: str = os.environ.get("QPR_RESULTS_DIR", "results")
    WORKERS: int = _env_int("QPR_WORKERS", 1)
    LOG_LEVEL: str = os.environ.get("QPR_LOG_LEVEL", "WARNING")

    @classmethod
    def validate(cls) -> None:
        """Validate that the settings are usable."""
        tolerances = [
            cls.NORM_TOLERANCE,
            cls.HERMITIAN_TOLERANCE,
            cls.PROJECTOR_TOLERANCE,
            cls.UNITARY_TOLERANCE,
            cls.EIGENVALUE_CLAMP,
            cls.PROBABILITY_FLOOR,
            cls.LEMMA_SLACK,
        ]
        if any(tol <= 0 for tol in tolerances):
            raise ValueError("All numerical tolerances must be positive")
        if cls.WORKERS < 1:
            raise ValueError("QPR_WORKERS must be at least 1")
        if cls.REPAIR_BUDGET_CONSTANT < 1:
            raise ValueError("QPR_REPAIR_BUDGET_CONSTANT must be at least 1")


# Create a singleton instance
settings = Settings()
