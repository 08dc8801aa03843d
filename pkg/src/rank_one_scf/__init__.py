"""
rank_one_scf

Best rank-one approximation of dense higher-order tensors with the HOSCF and
iHOSCF self-consistent field iterations, classical HOPM / ASVD baselines, greedy
CP deflation and a benchmark command line.
"""

from .config import (
    Algorithm,
    ExperimentSpec,
    Generator,
    InitKind,
    PairSchedule,
    RqiAcceptRule,
    RuntimeSettings,
    SolveOptions,
    StopRule,
)
from .exceptions import (
    ConfigurationError,
    DegenerateFactorError,
    EigenConvergenceError,
    GreedyAbortError,
    ModeError,
    NonSymmetricMatrixError,
    RankOneError,
    SolverFailureError,
    TensorFileError,
    TensorShapeError,
)
from .greedy_cp import GreedyReport, greedy_rank_r
from .nepv_bridge import (
    KktReport,
    StackedVector,
    SymBlockMatrix,
    build_j,
    kkt_report,
    scf_stopping_value,
    split_factors,
    stack_factors,
)
from .solvers import (
    SolveReport,
    asvd,
    hoscf,
    hopm,
    ihoscf,
    jacobi_asvd,
    jacobi_hopm,
    multi_start,
    solve,
)
from .tensor_core import (
    DenseTensor,
    FactorSet,
    dematricize,
    load_dt1,
    matricize,
    multilinear_form,
    rank_one_expand,
    residual_norm,
    save_dt1,
    ttv,
    ttvc,
)

__version__ = "0.1.0"
__all__ = [
    "Algorithm",
    "ExperimentSpec",
    "Generator",
    "InitKind",
    "PairSchedule",
    "RqiAcceptRule",
    "RuntimeSettings",
    "SolveOptions",
    "StopRule",
    "RankOneError",
    "ConfigurationError",
    "TensorShapeError",
    "ModeError",
    "TensorFileError",
    "DegenerateFactorError",
    "NonSymmetricMatrixError",
    "EigenConvergenceError",
    "SolverFailureError",
    "GreedyAbortError",
    "DenseTensor",
    "FactorSet",
    "matricize",
    "dematricize",
    "ttv",
    "ttvc",
    "multilinear_form",
    "rank_one_expand",
    "residual_norm",
    "save_dt1",
    "load_dt1",
    "StackedVector",
    "SymBlockMatrix",
    "KktReport",
    "build_j",
    "split_factors",
    "stack_factors",
    "kkt_report",
    "scf_stopping_value",
    "SolveReport",
    "solve",
    "hoscf",
    "ihoscf",
    "hopm",
    "jacobi_hopm",
    "asvd",
    "jacobi_asvd",
    "multi_start",
    "GreedyReport",
    "greedy_rank_r",
]
