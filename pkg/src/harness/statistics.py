"""
Monte Carlo success estimation with Wilson score intervals.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import sqrt
from typing import Callable, Optional, Sequence, Tuple, TypeVar

from tqdm import tqdm

from config import settings
from protocols import ProverStrategy, run_interaction
from utils.errors import ParameterError
from utils.rng import make_rng, trial_seeds

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class ProportionEstimate:
    """Point estimate of a Bernoulli rate and its Wilson interval."""

    successes: int
    trials: int
    low: float
    high: float

    @property
    def estimate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def interval(self) -> Tuple[float, float]:
        return self.low, self.high

    @property
    def half_width(self) -> float:
        return (self.high - self.low) / 2

    def contains(self, value: float) -> bool:
        return self.low - settings.LEMMA_SLACK <= value <= self.high + settings.LEMMA_SLACK

    def to_record(self) -> dict:
        return {
            "successes": self.successes,
            "trials": self.trials,
            "estimate": self.estimate,
            "interval": [self.low, self.high],
        }


def wilson_interval(successes: int, trials: int, z: Optional[float] = None) -> ProportionEstimate:
    """
    Wilson score interval for a binomial proportion.

    Args:
        successes: Number of successes
        trials: Number of trials
        z: Normal quantile (95% by default)

    Returns:
        ProportionEstimate with the interval clamped to [0, 1]
    """
    if trials < 0 or not 0 <= successes <= max(trials, 0):
        raise ParameterError(f"Invalid counts: {successes} successes in {trials} trials")
    if trials == 0:
        return ProportionEstimate(0, 0, 0.0, 1.0)
    z = settings.WILSON_Z if z is None else z
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    low, high = max(0.0, center - half), min(1.0, center + half)
    # Keep the point estimate inside the interval at the 0/1 edges.
    return ProportionEstimate(successes, trials, min(low, phat), max(high, phat))


def sigma_band(estimate: float, target: float, trials: int, width: float = 3.0) -> bool:
    """True when ``estimate`` lies within ``width`` binomial standard errors of ``target``."""
    if trials < 1:
        raise ParameterError("sigma_band needs at least one trial")
    sigma = sqrt(max(target * (1 - target), 0.0) / trials)
    return abs(estimate - target) <= width * sigma + settings.LEMMA_SLACK


def run_trials(task: Callable[[int, int], T], seed: int, trials: int,
               workers: Optional[int] = None, desc: Optional[str] = None) -> Sequence[T]:
    """
    Run ``task(trial_index, trial_seed)`` for every trial.

    Results come back in trial order whatever the worker count, so the fold
    over them is deterministic.

    Args:
        task: Callable receiving the trial index and its derived seed
        seed: Master seed
        trials: Number of trials
        workers: Thread count (``settings.WORKERS`` by default)
        desc: Progress-bar label; no bar when omitted

    Returns:
        List of task results
    """
    if trials < 1:
        raise ParameterError(f"trials must be at least 1, got {trials}")
    seeds = trial_seeds(seed, trials)
    workers = settings.WORKERS if workers is None else workers
    jobs = list(enumerate(seeds))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = executor.map(lambda job: task(*job), jobs)
        if desc is not None:
            results = tqdm(results, total=trials, desc=desc)
        return list(results)


def estimate_success(prover: ProverStrategy, protocol, trials: int, seed: int,
                     workers: Optional[int] = None, progress: bool = False) -> ProportionEstimate:
    """
    Monte Carlo acceptance frequency of ``prover`` against ``protocol``.

    Args:
        prover: Prover strategy
        protocol: Base or repeated protocol
        trials: Number of interactions (at least 30 for a meaningful interval)
        seed: Master seed
        workers: Thread count
        progress: Show a progress bar

    Returns:
        ProportionEstimate with its Wilson 95% interval
    """
    if trials < settings.MIN_TRIALS_FOR_INTERVAL:
        logger.warning("Only %d trials; the Wilson interval is indicative", trials)

    def task(_, trial_seed):
        return run_interaction(prover, protocol, make_rng(trial_seed))[1]

    verdicts = run_trials(task, seed, trials, workers, desc="interactions" if progress else None)
    result = wilson_interval(int(sum(verdicts)), trials)
    logger.info("Estimated success %.4f in [%.4f, %.4f] over %d trials",
                result.estimate, result.low, result.high, trials)
    return result
