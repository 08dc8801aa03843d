"""
Command-line front end: ``rank1 solve|experiment|scaling|greedy|gen``.
"""

import argparse
import sys
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from .bench import report_row, run_experiment, run_scaling, summarize, trace_frame, write_csv
from .config import (
    Algorithm,
    ExperimentSpec,
    Generator,
    PairSchedule,
    RqiAcceptRule,
    RuntimeSettings,
    SolveOptions,
    StopRule,
)
from .exceptions import ConfigurationError, RankOneError
from .generators import generate
from .greedy_cp import greedy_rank_r
from .nepv_bridge import build_j
from .solvers import solve
from .tensor_core import save_dt1
from .utils import get_logger, parse_dims, set_log_level

logger = get_logger(__name__)


def _int_list(text: str) -> List[int]:
    try:
        return [int(p) for p in text.replace("x", ",").split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected a comma-separated list of integers: {text}")


def _algo_list(text: str) -> List[Algorithm]:
    try:
        return [Algorithm(p.strip()) for p in text.split(",") if p.strip()]
    except ValueError:
        choices = ", ".join(a.value for a in Algorithm)
        raise argparse.ArgumentTypeError(f"Unknown algorithm in {text!r} (choose from {choices})")


def _add_tensor_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gen", choices=[g.value for g in Generator], default=None,
                        help="Tensor generator (default: exp, or file when --input is given)")
    parser.add_argument("--dims", type=parse_dims, default=None,
                        help="Dimensions such as 30x30x30 (generator defaults otherwise)")
    parser.add_argument("--input", default=None, help="Input tensor (.dt1)")
    parser.add_argument("--tensor-seed", type=int, default=0,
                        help="Seed of the gaussian and rank1 generators")
    parser.add_argument("--arcsin-grouping", choices=["product", "exponent"], default="product")


def _add_solver_args(parser: argparse.ArgumentParser, threads_list: bool = False) -> None:
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--max-iters", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None, help="(First) seed of the initial guess")
    if threads_list:
        parser.add_argument("--threads", type=_int_list, default=[1, 2, 4],
                            help="Thread counts, e.g. 1,2,4")
    else:
        parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--stop-rule", choices=[r.value for r in StopRule], default=None)
    parser.add_argument("--determinism", choices=["on", "off"], default=None,
                        help="'off' allows floating-point reassociation in J construction")
    parser.add_argument("--reuse-intermediates", action="store_true", default=None,
                        help="Share partial contractions across J blocks (needs --determinism off)")
    parser.add_argument("--pairs", choices=[p.value for p in PairSchedule], default=None)
    parser.add_argument("--rqi-accept", choices=[r.value for r in RqiAcceptRule], default=None)
    parser.add_argument("--env-file", default=None, help="Read RANK1_* defaults from this file")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser of the ``rank1`` command."""
    parser = argparse.ArgumentParser(
        prog="rank1", description="Best rank-one tensor approximation with HOSCF and baselines"
    )
    parser.add_argument("--log-level", default=None,
                        help="DEBUG, INFO, WARNING (default) or ERROR; RANK1_LOG_LEVEL otherwise")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="Run one solver from one initial guess")
    _add_tensor_args(p)
    _add_solver_args(p)
    p.add_argument("--algo", choices=[a.value for a in Algorithm], default=Algorithm.HOSCF.value)
    p.add_argument("--output", default=None, help="Write the result row as CSV")
    p.add_argument("--trace", default=None, help="Write the per-iteration trace as CSV")
    p.add_argument("--export-j", default=None, help="Write J at the final factors as .dt1")

    p = sub.add_parser("experiment", help="Multi-start experiment over seeds and algorithms")
    _add_tensor_args(p)
    _add_solver_args(p)
    p.add_argument("--algo", type=_algo_list, default=[Algorithm.HOSCF],
                   help="Comma-separated algorithms")
    p.add_argument("--seeds", type=int, default=None, help="Number of initial guesses")
    p.add_argument("--workers", type=int, default=1, help="Concurrent experiment cells")
    p.add_argument("--no-timings", action="store_true",
                   help="Write zero timings so the CSV is reproducible byte for byte")
    p.add_argument("--output", default=None, help="Per-run CSV")
    p.add_argument("--summary", default=None, help="Per-algorithm mean/std CSV")

    p = sub.add_parser("scaling", help="Thread-scaling benchmark of the J construction")
    _add_tensor_args(p)
    _add_solver_args(p, threads_list=True)
    p.add_argument("--algo", type=_algo_list, default=[Algorithm.HOSCF])
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--fixed-iters", type=int, default=None,
                   help="Run exactly this many iterations per solve")
    p.add_argument("--output", default=None)

    p = sub.add_parser("greedy", help="Greedy rank-R CP approximation by deflation")
    _add_tensor_args(p)
    _add_solver_args(p)
    p.add_argument("--algo", choices=[a.value for a in Algorithm], default=Algorithm.HOSCF.value)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--starts", type=int, default=1, help="Initial guesses per term")
    p.add_argument("--output", default=None, help="Per-term CSV")

    p = sub.add_parser("gen", help="Write a generated tensor to a .dt1 file")
    _add_tensor_args(p)
    p.add_argument("--output", required=True, help="Output .dt1 file")
    return parser


def _solve_options(args: argparse.Namespace) -> SolveOptions:
    """Environment defaults overridden by the flags that were given."""
    base = SolveOptions.from_env(getattr(args, "env_file", None))
    update: Dict[str, Any] = {}
    flags = {
        "tol": "tol", "max_iters": "max_iters", "seed": "seed", "stop_rule": "stop_rule",
        "pairs": "pairs", "rqi_accept": "rqi_accept_rule",
    }
    for attr, key in flags.items():
        value = getattr(args, attr, None)
        if value is not None:
            update[key] = value
    threads = getattr(args, "threads", None)
    if isinstance(threads, int):
        update["threads"] = threads
    if getattr(args, "determinism", None) is not None:
        update["deterministic"] = args.determinism == "on"
    if getattr(args, "reuse_intermediates", None):
        update["reuse_intermediates"] = True
    try:
        return SolveOptions(**{**base.model_dump(), **update})
    except ValueError as e:
        raise ConfigurationError(f"Invalid solver options: {str(e)}")


def _experiment_spec(args: argparse.Namespace, **extra: Any) -> ExperimentSpec:
    generator = args.gen or (Generator.FILE.value if args.input else Generator.EXP.value)
    data: Dict[str, Any] = {
        "generator": generator,
        "dims": args.dims,
        "tensor_seed": args.tensor_seed,
        "input_path": args.input,
    }
    if hasattr(args, "tol"):
        opts = _solve_options(args)
        data.update({"opts": opts, "first_seed": opts.seed})
    data.update({k: v for k, v in extra.items() if v is not None})
    try:
        return ExperimentSpec(**data)
    except ValueError as e:
        raise ConfigurationError(f"Invalid experiment: {str(e)}")


def _emit(df: pd.DataFrame, path: Optional[str]) -> None:
    text = write_csv(df, path)
    if path is None:
        sys.stdout.write(text)
    else:
        logger.info("Wrote %d rows to %s", len(df), path)


def cmd_solve(args: argparse.Namespace) -> int:
    spec = _experiment_spec(args, seeds=1)
    A = generate(spec, args.arcsin_grouping)
    report = solve(A, args.algo, spec.opts)
    row = report_row(spec.generator.value, A, report)
    print(
        f"lambda={row['lambda']:.12g} rho={row['rho']:.6f} "
        f"iterations={row['iters']} converged={row['converged']}"
    )
    if args.output:
        _emit(pd.DataFrame.from_records([row]), args.output)
    if args.trace:
        _emit(trace_frame(report), args.trace)
    if args.export_j:
        build_j(A, report.result).export(args.export_j)
    return 0 if report.converged else 3


def cmd_experiment(args: argparse.Namespace) -> int:
    spec = _experiment_spec(
        args, algorithms=args.algo, seeds=args.seeds, workers=args.workers,
        record_timings=not args.no_timings,
    )
    results = run_experiment(spec, generate(spec, args.arcsin_grouping))
    summary = summarize(results)
    if args.output:
        _emit(results, args.output)
    if args.summary:
        _emit(summary, args.summary)
    sys.stdout.write(write_csv(summary))
    return 0


def cmd_scaling(args: argparse.Namespace) -> int:
    spec = _experiment_spec(
        args, algorithms=args.algo, threads=args.threads, repeats=args.repeats,
        fixed_iters=args.fixed_iters,
    )
    _emit(run_scaling(spec, generate(spec, args.arcsin_grouping)), args.output)
    return 0


def cmd_greedy(args: argparse.Namespace) -> int:
    spec = _experiment_spec(args)
    A = generate(spec, args.arcsin_grouping)
    report = greedy_rank_r(A, args.rank, args.algo, spec.opts, starts=args.starts)
    df = pd.DataFrame({
        "term": range(1, report.rank + 1),
        "lambda": [t.weight for t in report.terms],
        "iters": [r.iterations for r in report.reports],
        "converged": [r.converged for r in report.reports],
        "residual_ratio": report.residual_ratios,
    })
    _emit(df, args.output)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    spec = _experiment_spec(args)
    A = generate(spec, args.arcsin_grouping)
    save_dt1(A, args.output)
    logger.info("Wrote %s tensor %s to %s", spec.generator.value, A.dims, args.output)
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "experiment": cmd_experiment,
    "scaling": cmd_scaling,
    "greedy": cmd_greedy,
    "gen": cmd_gen,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the ``rank1`` console script.

    Returns:
        0 on success, 3 when ``solve`` stopped without converging, 2 on invalid
        configuration, 1 on any other package error
    """
    args = build_parser().parse_args(argv)
    try:
        level = args.log_level or RuntimeSettings.from_env().log_level
        set_log_level(level)
        return COMMANDS[args.command](args)
    except ConfigurationError as e:
        print(f"rank1: configuration error: {e.message}", file=sys.stderr)
        return 2
    except RankOneError as e:
        print(f"rank1: {e.message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
