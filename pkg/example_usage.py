"""
Example usage of the simulator as a Python library.

This demonstrates how to use the packages programmatically
rather than through the ``run_experiments.py`` command line.
"""
import sys
import os
from math import pi

import numpy as np

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from harness import chung_example_table, estimate_success, raz_check
from hilbert import QuantumState, RegisterLayout
from measure import ValueMeasurement, valest
from memoryless import adversarial_memory_instance, forgetfulness_distance
from protocols import exact_success, parity, passive_prover, product_prover, repeat, rotation_prover, subset
from reductions import ReductionParams, open_session, run_public_coin_reduction
from utils.rng import make_rng


def example_repetition():
    """Example: exact and sampled success of a repeated protocol."""
    print("=" * 60)
    print("Example 1: Threshold repetition")
    print("=" * 60)

    protocol = repeat(parity(2), 3, 2)
    prover = product_prover(rotation_prover(pi / 6), 3)
    exact = exact_success(prover, protocol)
    sampled = estimate_success(prover, protocol, trials=2000, seed=7)
    print(f"\n{protocol.name}: exact {exact:.4f}, sampled {sampled.estimate:.4f} in {sampled.interval}\n")


def example_value_estimation():
    """Example: the projective value measurement on a qubit."""
    print("=" * 60)
    print("Example 2: Value estimation")
    print("=" * 60)

    layout = RegisterLayout.qubits("a")
    m = ValueMeasurement.from_operator(np.diag([0.2, 0.9]).astype(complex), layout, 0.05, 0.01)
    state = QuantumState.pure(layout, np.array([1, 1]) / np.sqrt(2))
    rng = make_rng(1)
    first = valest(m, state, rng)
    second = valest(m, first.post_state, rng)
    print(f"\nFirst estimate {first.value:.3f}, repeated estimate {second.value:.3f}\n")


def example_forgetfulness():
    """Example: forgetfulness of the flooded state on the adversarial instance."""
    print("=" * 60)
    print("Example 3: Forgetfulness")
    print("=" * 60)

    m_family, p_family, state, fp = adversarial_memory_instance()
    result = forgetfulness_distance(m_family, p_family, state, fp)
    print(f"\nT={fp.T}: distance {result.distance:.6f} against bound {result.bound:.3f} "
          f"({'within' if result.passed else 'OUTSIDE'})\n")


def example_reduction():
    """Example: a single public-coin reduction run against one external verifier."""
    print("=" * 60)
    print("Example 4: Public-coin reduction")
    print("=" * 60)

    protocol = repeat(subset(10, 9), 3, 3)
    prover = passive_prover(protocol)
    params = ReductionParams(kind="public-coin", xi=0.729, k=3, t=3, mode="desk", iterations=10,
                             epsilon0=0.1, epsilon=0.05, delta=0.1, eta=0.5, flooding_T=2)
    record = run_public_coin_reduction(prover, protocol, params, open_session(protocol.base, make_rng(3, 1)),
                                       prover.copies(10), make_rng(3), seed=3)
    print(f"\nEmbedded at coordinate {record.i}: completed={record.completed}, "
          f"verdict={record.external_verdict}, abort={record.abort_cause}\n")


def example_lemmas():
    """Example: Raz's lemma and the soft versus hard decision."""
    print("=" * 60)
    print("Example 5: Lemma checks")
    print("=" * 60)

    check = raz_check(2, [(0.5, 0.5)] * 2, lambda x: x[0] == 1 or x[1] == 1)
    print(f"\nRaz: {check.lhs:.4f} <= {check.bound:.4f}")
    for row in chung_example_table(10, 0.9):
        print(f"  {row['decision']:<5} nu={row['nu']!s:<4} Pr[fail | accept] = {row['conditional_failure']:.4f}")
    print()


if __name__ == "__main__":
    print("\nParallel repetition simulator - Library Usage Examples\n")

    try:
        example_repetition()
        example_value_estimation()
        example_forgetfulness()
        example_reduction()
        example_lemmas()

        print("=" * 60)
        print("All examples completed successfully!")
        print("=" * 60)

    except Exception as e:
        print(f"\n✗ Error running examples: {e}")
        import traceback
        traceback.print_exc()
