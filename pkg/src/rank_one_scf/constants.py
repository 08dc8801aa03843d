DEFAULT_TOL = 1.0e-4
DEFAULT_MAX_ITERS = 500
DEFAULT_SEEDS = 50

# residual_norm switches to the expansion-free formula above this many entries
DENSE_RESIDUAL_LIMIT = 2 ** 24

UNIT_TOL = 1.0e-12
STACK_UNIT_TOL = 1.0e-8
DEGENERATE_BLOCK_TOL = 1.0e-12
SYMMETRY_RTOL = 1.0e-10
RQI_CONDITION_LIMIT = 1.0e14
RQI_SHIFT_PERTURBATION = 1.0e-10

DT1_MAGIC = b"DTEN1\x00"

GENERATOR_DEFAULT_DIMS = {
    "exp": (30, 30, 30),
    "arcsin": (20, 20, 20, 20),
    "tan": (10, 10, 10, 10, 10),
    "gaussian": (10, 10, 10),
    "rank1": (10, 10, 10),
}

CSV_COLUMNS = [
    "generator", "dims", "algo", "seed", "lambda", "rho", "iters", "converged",
    "wall_s", "phase_j_s", "phase_eig_s",
]

SCALING_COLUMNS = [
    "algo", "dims", "threads", "iters", "lambda", "wall_s", "phase_j_s", "phase_eig_s",
    "phase_other_s", "j_fraction", "max_abs_diff_vs_serial",
]

TRACE_COLUMNS = [
    "k", "lambda", "eigenvalue", "stop_value", "kkt_max", "rqi_accepted",
    "t_j_s", "t_eig_s", "t_other_s",
]
