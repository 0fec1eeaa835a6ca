"""Command-line harness.

Subcommands:
  simulate       run one (model, n, m, alpha) cell and print records
  sweep          run the full config grid, write CSV + summary sidecar
  verify         run the oracle verification suite (exit 2 on failure)
  fit-constants  calibrate bound constants, emit a [bounds] TOML snippet

Exit codes: 0 success, 1 config error, 2 oracle-suite failure.
The environment variable LOWDOSE_THREADS is the fallback for --threads
(0 means one worker per CPU).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import harness, verify
from .harness import MODELS, Cell, ConfigError, ExperimentConfig


def _add_common(parser: argparse.ArgumentParser, config_help: str) -> None:
    parser.add_argument("--config", metavar="PATH", help=config_help)
    parser.add_argument("--seed", type=int, metavar="U64", help="master seed (overrides config)")
    parser.add_argument("--out", metavar="PATH", help="output path (overrides config)")
    parser.add_argument(
        "--threads",
        type=int,
        metavar="N",
        default=None,
        help="worker threads; 0 = one per CPU (default: LOWDOSE_THREADS or 1)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowdose",
        description="Monte Carlo harness for spectral phaseless recovery from photon counts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one grid cell verbosely")
    _add_common(sim, "config file supplying solver/limit settings")
    sim.add_argument("--model", choices=MODELS, default="poisson")
    sim.add_argument("--n", type=int, default=16)
    sim.add_argument("--m", type=int, default=1024)
    sim.add_argument("--alpha", type=float, default=1.0)
    sim.add_argument("--trials", type=int, default=1)
    sim.add_argument(
        "--deviation", action="store_true", help="also measure the deviation norm per trial"
    )

    swp = sub.add_parser("sweep", help="run the full config grid")
    _add_common(swp, "experiment config file (required)")

    ver = sub.add_parser("verify", help="run the oracle verification suite")
    ver.add_argument("--seed", type=int, metavar="U64", help="seed for the verification runs")
    ver.add_argument("--out", metavar="PATH", help="also write the report to a file")

    fit = sub.add_parser("fit-constants", help="calibrate bound constants from deviation norms")
    _add_common(fit, "config file supplying solver settings")
    fit.add_argument("--n", type=int, default=harness.FIT_DEFAULTS["n"])
    fit.add_argument("--m", type=int, default=harness.FIT_DEFAULTS["m"])
    fit.add_argument("--alpha", type=float, default=harness.FIT_DEFAULTS["alpha"])
    fit.add_argument("--trials", type=int, default=harness.FIT_DEFAULTS["trials"])
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = harness.config_from_toml(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must fit in 64 bits")
        overrides["master_seed"] = args.seed
    if getattr(args, "out", None) is not None:
        overrides["output_path"] = args.out
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg.validate()


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    cfg = dataclasses.replace(
        cfg,
        models=(args.model,),
        n_grid=(args.n,),
        m_grid=(args.m,),
        alpha_grid=(args.alpha,),
        trials=args.trials,
        measure_deviation=cfg.measure_deviation or args.deviation,
    ).validate()
    threads = harness.resolve_threads(args.threads)
    cell = Cell(args.model, args.n, args.m, args.alpha)
    records = harness.run_trials(cfg, cells=[cell], threads=threads)
    for rec in records:
        print(f"trial {rec.trial}: rel_error={rec.rel_error}")
        print(f"  lambda0={rec.lambda0} iterations={rec.iterations}")
        if rec.deviation_norm is not None:
            print(f"  deviation_norm={rec.deviation_norm}")
        if rec.predicted_error_bound is not None:
            print(f"  theorem1_predicted={rec.predicted_error_bound}")
        if rec.flags:
            print(f"  flags={'|'.join(rec.flags)}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(harness.CSV_HEADER + "\n")
            for rec in records:
                fh.write(harness.record_to_csv_row(rec) + "\n")
        print(f"wrote {args.out}")
    errors = [r.rel_error for r in records if r.rel_error is not None]
    if errors:
        print(f"median rel_error over {len(errors)} trials: {sorted(errors)[len(errors) // 2]}")
    return 0


def _cmd_sweep(args) -> int:
    if not args.config:
        raise ConfigError("sweep requires --config")
    cfg = _load_config(args)
    threads = harness.resolve_threads(args.threads)
    records, csv_path, summary_path = harness.run_sweep(cfg, threads=threads)
    print(f"wrote {len(records)} records to {csv_path}")
    print(f"wrote summary to {summary_path}")
    return 0


def _cmd_verify(args) -> int:
    seed = verify.DEFAULT_VERIFY_SEED if args.seed is None else args.seed
    results = verify.run_all_checks(seed)
    failed = [r for r in results if not r.passed]
    report = "\n".join(r.line() for r in results) + f"\n{len(results) - len(failed)}/{len(results)} checks passed\n"
    print(report, end="")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(report)
    return 2 if failed else 0


def _cmd_fit_constants(args) -> int:
    cfg = harness.config_from_toml(args.config) if args.config else ExperimentConfig()
    seed = args.seed if args.seed is not None else cfg.master_seed
    threads = harness.resolve_threads(args.threads)
    constants, details = harness.fit_bound_constants(
        master_seed=seed,
        n=args.n,
        m=args.m,
        alpha=args.alpha,
        trials=args.trials,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
        threads=threads,
    )
    snippet = harness.constants_to_toml(constants)
    for key, value in details.items():
        print(f"# {key} = {value}", file=sys.stderr)
    print(snippet, end="")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(snippet)
        print(f"# wrote {args.out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "sweep": _cmd_sweep,
        "verify": _cmd_verify,
        "fit-constants": _cmd_fit_constants,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
