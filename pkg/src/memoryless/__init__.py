"""Memoryless repair: Prepare, Repair′ and the forgetfulness tester."""
from .params import FloodingParams
from .family import ProjectionFamily
from .flooding import FloodingRound, FloodingTrace, FloodingResult, prepare, repair_prime
from .forgetfulness import (
    ForgetfulnessResult,
    forgetfulness_distance,
    enumerate_paths,
    ensemble_distance,
    adversarial_memory_instance,
    random_instance,
)

__all__ = [
    "FloodingParams",
    "ProjectionFamily",
    "FloodingRound",
    "FloodingTrace",
    "FloodingResult",
    "prepare",
    "repair_prime",
    "ForgetfulnessResult",
    "forgetfulness_distance",
    "enumerate_paths",
    "ensemble_distance",
    "adversarial_memory_instance",
    "random_instance",
]
