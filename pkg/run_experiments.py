"""
Command-line interface for the parallel repetition simulator.

Subcommands:
1. lemmas  - check Raz's lemma, the flooding lemma, the HPPW inequality and forgetfulness
2. reduce  - run a reduction experiment from a JSON config
3. bounds  - print soundness bounds, reduction guarantees and the soft/hard table
4. props   - run the per-package property suites

The exit code is 0 iff every gate passed.
"""
import sys
import os
import argparse
import logging

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from config import settings
from harness import (
    ExperimentConfig,
    VARIANTS,
    bound_table,
    chung_example_table,
    public_guarantee,
    run_config,
    run_properties,
    three_guarantee,
)
from utils.errors import QprError

SUITES = ("raz", "flooding", "hppw", "forgetfulness")


def _mark(passed: bool) -> str:
    return "✓" if passed else "✗"


def run_lemmas(args) -> bool:
    """Run the selected lemma suites and write one JSONL file per suite."""
    suites = SUITES if args.suite == "all" else (args.suite,)
    all_passed = True
    for suite in suites:
        output = os.path.join(args.out, f"lemma-{suite}.jsonl") if args.out else None
        config = ExperimentConfig(kind="lemma-check", name=f"lemma-{suite}", suite=suite,
                                  seed=args.seed, output=output)
        print(f"Checking {suite}...")
        result = run_config(config)
        aggregates = result.aggregates
        print(f"{_mark(result.passed)} {suite}: {aggregates['passing']}/{aggregates['checks']} checks within bound")
        all_passed = all_passed and result.passed
    return all_passed


def run_reduce(args) -> bool:
    """Run one reduction experiment from its config file."""
    config = ExperimentConfig.from_file(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.out is not None:
        overrides["output"] = args.out
    if overrides:
        config = ExperimentConfig.model_validate({**config.model_dump(), **overrides})

    print(f"Running {config.name} ({config.trials} trials, seed {config.seed})...")
    result = run_config(config)
    aggregates = result.aggregates
    if config.kind == "reduction-run":
        completion = aggregates["completion"]
        embedded = aggregates["embedded_success"]
        guarantee = aggregates["guarantee"]
        print("-" * 50)
        print(f"Protocol:          {aggregates['protocol']}")
        print(f"Prover:            {aggregates['prover']}")
        print(f"xi:                {aggregates['xi']:.6f}")
        print(f"Completion rate:   {completion['estimate']:.4f} {completion['interval']}")
        print(f"Embedded success:  {embedded['estimate']:.4f} {embedded['interval']}")
        print(f"Target (t/k)·c:    {aggregates['target']:.4f}")
        print(f"Guarantee:         {guarantee['value']:.4f}{' (vacuous)' if guarantee['vacuous'] else ''}")
        print(f"Abort causes:      {aggregates['abort_causes']}")
        print("-" * 50)
        print(f"{_mark(aggregates['embedding_ok'])} external query embedded at coordinate i")
        print(f"{_mark(aggregates['transcripts_consistent'])} completed transcripts consistent")
        print(f"{_mark(aggregates['embedded_rate_ok'])} embedded success ≥ (t/k)·completion")
    if config.output:
        print(f"Records written to {config.output}")
    return result.passed


def run_bounds(args) -> bool:
    """Print the bound table, the guarantees at each grid point and the soft/hard table."""
    ks = [int(k) for k in args.grid.split(",")]
    ratios = [float(r) for r in args.ratios.split(",")]
    rows = bound_table(args.epsilon, ks, ratios, args.m, args.variant)
    print(f"\nSoundness bounds (epsilon={args.epsilon}, m={args.m}, variant={args.variant})")
    print("=" * 78)
    print(f"{'k':>7} {'t':>7} {'public':>14} {'three':>14} {'informal':>14}")
    for row in rows:
        cells = []
        for key in ("public", "three", "informal"):
            bound = row[key]
            cells.append(f"{bound['value']:.4e}{'*' if bound['vacuous'] else ' '}")
        print(f"{row['k']:>7} {row['t']:>7} " + " ".join(f"{cell:>14}" for cell in cells))
    print("(* vacuous or precondition fails; informal bounds use unit constants)")

    xi = args.xi
    print(f"\nSingle-fold guarantees for xi={xi}")
    print("=" * 78)
    for row in rows:
        public = public_guarantee(xi, args.m, row["k"], row["t"])
        three = three_guarantee(xi, row["k"], row["t"])
        print(f"{row['k']:>7} {row['t']:>7} {public.value:>14.4f}{'*' if public.vacuous else ' '}"
              f" {three.value:>14.4f}{'*' if three.vacuous else ' '}")

    print(f"\nConditional failure, soft versus hard decision (k={args.chung_k}, delta={args.chung_delta})")
    print("=" * 78)
    for row in chung_example_table(args.chung_k, args.chung_delta):
        print(f"  {row['decision']:<6} nu={row['nu']!s:<5} Pr[fail_i | accept] = {row['conditional_failure']:.6f}")
    return True


def run_props(args) -> bool:
    """Run the property suites."""
    results = run_properties(args.seed, args.package or None)
    current = None
    for result in results:
        if result.package != current:
            current = result.package
            print(f"\n{current}")
            print("-" * 50)
        print(f"{_mark(result.passed)} {result.name}: {result.detail}")
    failed = sum(not r.passed for r in results)
    print(f"\n{len(results) - failed}/{len(results)} properties hold")
    return failed == 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Desk-scale simulator of post-quantum threshold parallel repetition"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    lemmas = sub.add_parser("lemmas", help="Check the probabilistic lemmas")
    lemmas.add_argument("--suite", choices=SUITES + ("all",), default="all")
    lemmas.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    lemmas.add_argument("--out", type=str, default=settings.RESULTS_DIR,
                        help="Directory for JSONL records (empty string to skip)")
    lemmas.set_defaults(handler=run_lemmas)

    reduce = sub.add_parser("reduce", help="Run a reduction experiment")
    reduce.add_argument("--config", type=str, required=True, help="Experiment config (JSON)")
    reduce.add_argument("--seed", type=int, default=None, help="Override the config seed")
    reduce.add_argument("--trials", type=int, default=None, help="Override the trial count")
    reduce.add_argument("--out", type=str, default=None, help="Override the output file")
    reduce.set_defaults(handler=run_reduce)

    bounds = sub.add_parser("bounds", help="Print bound tables")
    bounds.add_argument("--variant", choices=VARIANTS, default="full")
    bounds.add_argument("--grid", type=str, default="10,100,1000,10000", help="Comma-separated k values")
    bounds.add_argument("--ratios", type=str, default="0.5,0.75,1.0", help="Comma-separated t/k ratios")
    bounds.add_argument("--epsilon", type=float, default=0.5)
    bounds.add_argument("--m", type=int, default=1)
    bounds.add_argument("--xi", type=float, default=0.5, help="k-fold success for the guarantees")
    bounds.add_argument("--chung-k", type=int, default=10)
    bounds.add_argument("--chung-delta", type=float, default=0.9)
    bounds.set_defaults(handler=run_bounds)

    props = sub.add_parser("props", help="Run the package property suites")
    props.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    props.add_argument("--package", action="append",
                       choices=("hilbert", "measure", "memoryless", "protocols", "reductions", "harness"),
                       help="Restrict to a package (repeatable)")
    props.set_defaults(handler=run_props)
    return parser


def main(argv=None) -> int:
    """Parse arguments, run the subcommand and return the exit code."""
    args = build_parser().parse_args(argv)
    settings.validate()
    logging.basicConfig(level=settings.LOG_LEVEL, format="%(levelname)s %(name)s: %(message)s")

    try:
        passed = args.handler(args)
    except QprError as e:
        print(f"✗ {type(e).__name__}: {e}")
        return 1

    print("\n" + "=" * 50)
    print("All gates passed" if passed else "Some gates FAILED")
    print("=" * 50)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
