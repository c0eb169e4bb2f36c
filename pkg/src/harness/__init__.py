"""Experiment harness: statistics, lemma checks, bound calculators, configs and storage."""
from .statistics import ProportionEstimate, wilson_interval, sigma_band, run_trials, estimate_success
from .lemmas import (
    LemmaCheck,
    raz_check,
    raz_sweep,
    all_events,
    flooding_check,
    flooding_sweep,
    hppw_check,
    random_joint_law,
    chung_example_table,
)
from .bounds import (
    BoundValue,
    VARIANTS,
    bound_public,
    bound_three,
    bound_informal,
    three_message_margin,
    public_guarantee,
    three_guarantee,
    bound_table,
    increases_in_k,
)
from .storage import ResultStore, normalize, dumps
from .properties import PropertyResult, SUITES, run_properties
from .experiment import (
    ProtocolSpec,
    ProverSpec,
    LemmaOptions,
    ExperimentConfig,
    ExperimentResult,
    build_prover,
    run_config,
)

__all__ = [
    "ProportionEstimate",
    "wilson_interval",
    "sigma_band",
    "run_trials",
    "estimate_success",
    "LemmaCheck",
    "raz_check",
    "raz_sweep",
    "all_events",
    "flooding_check",
    "flooding_sweep",
    "hppw_check",
    "random_joint_law",
    "chung_example_table",
    "BoundValue",
    "VARIANTS",
    "bound_public",
    "bound_three",
    "bound_informal",
    "three_message_margin",
    "public_guarantee",
    "three_guarantee",
    "bound_table",
    "increases_in_k",
    "ResultStore",
    "normalize",
    "dumps",
    "PropertyResult",
    "SUITES",
    "run_properties",
    "ProtocolSpec",
    "ProverSpec",
    "LemmaOptions",
    "ExperimentConfig",
    "ExperimentResult",
    "build_prover",
    "run_config",
]
