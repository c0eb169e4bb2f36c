"""Interactive arguments, threshold repetition and prover strategies."""
from .public_coin import PublicCoinProtocol
from .three_message import ThreeMessageProtocol
from .repetition import RepeatedProtocol, Transcript, threshold_verdict, repeat, as_repeated
from .provers import (
    ProverStrategy,
    BadCorrelationsLaw,
    passive_prover,
    rotation_prover,
    product_prover,
    bad_correlations_prover,
    response_register,
    haar_prover,
    shift_unitary,
    xor_unitary,
)
from .catalog import (
    CATALOG,
    always_accept,
    subset,
    chained_subset,
    parity,
    preimage,
    programmable,
    resolve,
)
from .interaction import (
    run_interaction,
    public_coin_game,
    three_message_game,
    exact_success,
    verdict_marginals,
    measure_registers,
    register_distribution,
    check_compatible,
)
from .optimal import (
    optimal_success,
    optimal_classical_prover,
    best_guess_prover,
    perfect_prover,
)

__all__ = [
    "PublicCoinProtocol",
    "ThreeMessageProtocol",
    "RepeatedProtocol",
    "Transcript",
    "threshold_verdict",
    "repeat",
    "as_repeated",
    "ProverStrategy",
    "BadCorrelationsLaw",
    "passive_prover",
    "rotation_prover",
    "product_prover",
    "bad_correlations_prover",
    "response_register",
    "haar_prover",
    "shift_unitary",
    "xor_unitary",
    "CATALOG",
    "always_accept",
    "subset",
    "chained_subset",
    "parity",
    "preimage",
    "programmable",
    "resolve",
    "run_interaction",
    "public_coin_game",
    "three_message_game",
    "exact_success",
    "verdict_marginals",
    "measure_registers",
    "register_distribution",
    "check_compatible",
    "optimal_success",
    "optimal_classical_prover",
    "best_guess_prover",
    "perfect_prover",
]
