"""
Multi-start experiments, thread-scaling benchmarks and their CSV output.
"""

import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .config import Algorithm, ExperimentSpec, SolveOptions
from .constants import CSV_COLUMNS, SCALING_COLUMNS, TRACE_COLUMNS
from .exceptions import SolverFailureError
from .generators import generate
from .solvers import SolveReport, solve
from .tensor_core import DenseTensor, frobenius_norm
from .utils import format_dims, get_logger, round_sig

logger = get_logger(__name__)

Cell = Tuple[int, Algorithm, int]


def _timing(value: float, record: bool) -> float:
    return round_sig(value) if record else 0.0


def report_row(
    generator: str, A: DenseTensor, report: SolveReport, record_timings: bool = True
) -> Dict[str, Any]:
    """One result row (documented CSV columns) for a finished solve."""
    norm = frobenius_norm(A)
    return {
        "generator": generator,
        "dims": format_dims(A.dims),
        "algo": report.algorithm,
        "seed": report.seed,
        "lambda": report.weight,
        "rho": abs(report.weight) / norm if norm > 0 else 0.0,
        "iters": report.iterations,
        "converged": report.converged,
        "wall_s": _timing(report.wall_s, record_timings),
        "phase_j_s": _timing(report.phase_j_s, record_timings),
        "phase_eig_s": _timing(report.phase_eig_s, record_timings),
    }


def _experiment_row(
    spec: ExperimentSpec, A: DenseTensor, algo: Algorithm, seed: int
) -> Dict[str, Any]:
    try:
        report = solve(A, algo, spec.opts.with_seed(seed))
    except SolverFailureError as e:
        logger.error("Cell %s/seed %d failed: %s", algo.value, seed, e.message)
        partial = e.details.get("report")
        return {
            "generator": spec.generator.value, "dims": format_dims(A.dims), "algo": algo.value,
            "seed": seed, "lambda": float("nan"), "rho": float("nan"),
            "iters": partial.iterations if partial is not None else 0,
            "converged": False, "wall_s": 0.0, "phase_j_s": 0.0, "phase_eig_s": 0.0,
        }

    row = report_row(spec.generator.value, A, report, spec.record_timings)
    logger.info(
        "%s seed %d: lambda = %.10g, rho = %.4f, %d iterations",
        algo.value, seed, report.weight, row["rho"], report.iterations,
    )
    return row


def run_experiment(spec: ExperimentSpec, tensor: Optional[DenseTensor] = None) -> pd.DataFrame:
    """
    Run every (algorithm, seed) cell of a multi-start experiment.

    Args:
        spec: Experiment description
        tensor: Input tensor; built from ``spec`` when omitted

    Returns:
        DataFrame with the documented CSV columns, ordered by algorithm (as listed in
        ``spec.algorithms``) then seed, whatever the worker count
    """
    A = tensor if tensor is not None else generate(spec)
    cells: List[Cell] = [
        (index, algo, spec.first_seed + s)
        for index, algo in enumerate(spec.algorithms)
        for s in range(spec.seeds)
    ]
    logger.info("Running %d cells on %s tensor %s", len(cells), spec.generator.value, A.dims)

    def run(cell: Cell) -> Dict[str, Any]:
        return _experiment_row(spec, A, cell[1], cell[2])

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(cell) for cell in cells]

    order = {algo.value: i for i, algo in enumerate(spec.algorithms)}
    df = pd.DataFrame.from_records(rows, columns=CSV_COLUMNS)
    df["_order"] = df["algo"].map(order)
    df = df.sort_values(by=["_order", "seed"], kind="mergesort").drop(columns="_order")
    return df.reset_index(drop=True)


def summarize(results: pd.DataFrame) -> pd.DataFrame:
    """
    Mean and sample standard deviation per algorithm.

    A single seed gives a standard deviation of 0.
    """
    grouped = results.groupby("algo", sort=False)
    summary = pd.DataFrame({
        "lambda_mean": grouped["lambda"].mean(),
        "lambda_std": grouped["lambda"].std(ddof=1),
        "rho_mean": grouped["rho"].mean(),
        "rho_std": grouped["rho"].std(ddof=1),
        "iters_mean": grouped["iters"].mean(),
        "iters_std": grouped["iters"].std(ddof=1),
        "converged_fraction": grouped["converged"].mean(),
        "wall_s_mean": grouped["wall_s"].mean(),
        "runs": grouped["seed"].count(),
    })
    std_columns = ["lambda_std", "rho_std", "iters_std"]
    summary[std_columns] = summary[std_columns].fillna(0.0)
    return summary.reset_index()


def _factor_diff(report: SolveReport, serial: SolveReport) -> float:
    diffs = [abs(report.weight - serial.weight)]
    diffs.extend(
        float(np.max(np.abs(u - v)))
        for u, v in zip(report.result.factors, serial.result.factors)
    )
    return float(max(diffs))


def _scaling_options(spec: ExperimentSpec, threads: int) -> SolveOptions:
    update: Dict[str, Any] = {"threads": threads, "seed": spec.first_seed}
    if spec.fixed_iters is not None:
        # unreachable tolerance: every run performs exactly fixed_iters iterations
        update.update({"max_iters": spec.fixed_iters, "tol": sys.float_info.min})
    return spec.opts.model_copy(update=update)


def _timed_runs(
    A: DenseTensor, algo: Algorithm, opts: SolveOptions, repeats: int
) -> Tuple[SolveReport, Dict[str, float]]:
    reports = [solve(A, algo, opts) for _ in range(repeats)]
    means = {
        "wall_s": float(np.mean([r.wall_s for r in reports])),
        "phase_j_s": float(np.mean([r.phase_j_s for r in reports])),
        "phase_eig_s": float(np.mean([r.phase_eig_s for r in reports])),
        "phase_other_s": float(np.mean([r.phase_other_s for r in reports])),
    }
    return reports[-1], means


def run_scaling(spec: ExperimentSpec, tensor: Optional[DenseTensor] = None) -> pd.DataFrame:
    """
    Time each algorithm over the thread counts of ``spec.threads``.

    Every row reports mean phase timings over ``spec.repeats`` runs, the share of
    iteration time spent building J, and the largest deviation of λ and the factors
    from the single-thread run. HOPM rows are always added for contrast; HOPM has
    no block-level parallelism, so its time is reported as "other".

    Args:
        spec: Experiment description; ``first_seed`` seeds the initial guess
        tensor: Input tensor; built from ``spec`` when omitted

    Returns:
        DataFrame with the scaling columns
    """
    A = tensor if tensor is not None else generate(spec)
    algorithms = list(spec.algorithms)
    if Algorithm.HOPM not in algorithms:
        algorithms.append(Algorithm.HOPM)

    rows: List[Dict[str, Any]] = []
    for algo in algorithms:
        serial, _ = _timed_runs(A, algo, _scaling_options(spec, 1), 1)
        for threads in spec.threads:
            opts = _scaling_options(spec, threads)
            report, means = _timed_runs(A, algo, opts, spec.repeats)
            phase_total = means["phase_j_s"] + means["phase_eig_s"] + means["phase_other_s"]
            rows.append({
                "algo": algo.value,
                "dims": format_dims(A.dims),
                "threads": threads,
                "iters": report.iterations,
                "lambda": report.weight,
                "wall_s": round_sig(means["wall_s"]),
                "phase_j_s": round_sig(means["phase_j_s"]),
                "phase_eig_s": round_sig(means["phase_eig_s"]),
                "phase_other_s": round_sig(means["phase_other_s"]),
                "j_fraction": round_sig(means["phase_j_s"] / phase_total) if phase_total else 0.0,
                "max_abs_diff_vs_serial": _factor_diff(report, serial),
            })
            logger.info(
                "%s with %d threads: %.3g s, J share %.3f",
                algo.value, threads, means["wall_s"], rows[-1]["j_fraction"],
            )
    return pd.DataFrame.from_records(rows, columns=SCALING_COLUMNS)


def trace_frame(report: SolveReport) -> pd.DataFrame:
    """Per-iteration trace of a solve as a DataFrame."""
    records = [
        {
            "k": r.k,
            "lambda": r.weight,
            "eigenvalue": r.eigenvalue,
            "stop_value": r.stop_value,
            "kkt_max": r.kkt_max,
            "rqi_accepted": r.rqi_accepted,
            "t_j_s": round_sig(r.t_j_s),
            "t_eig_s": round_sig(r.t_eig_s),
            "t_other_s": round_sig(r.t_other_s),
        }
        for r in report.trace
    ]
    return pd.DataFrame.from_records(records, columns=TRACE_COLUMNS)


def write_csv(df: pd.DataFrame, path: Optional[Union[str, Path]] = None) -> str:
    """
    Render a DataFrame as CSV with a header row and write it to ``path`` if given.

    Returns:
        The CSV text
    """
    text = df.to_csv(index=False, lineterminator="\n", float_format="%.12g")
    if path is not None:
        Path(path).write_text(text)
    return text
