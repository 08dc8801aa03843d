"""
Greedy rank-one deflation producing a rank-R CP approximation.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .config import Algorithm, SolveOptions
from .exceptions import ConfigurationError, GreedyAbortError, SolverFailureError
from .solvers import SolveReport, multi_start, solve
from .tensor_core import DenseTensor, FactorSet, frobenius_norm, rank_one_expand
from .utils import get_logger

logger = get_logger(__name__)


@dataclass(eq=False)
class GreedyReport:
    """
    Terms of a greedy CP approximation.

    ``residual_ratios[r]`` is |A^(r+2)|_F / |A^(1)|_F, the relative residual left
    after r + 1 terms have been deflated.
    """

    terms: List[FactorSet] = field(default_factory=list)
    residual_ratios: List[float] = field(default_factory=list)
    reports: List[SolveReport] = field(default_factory=list)
    residual_norms: List[float] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.terms)

    def reconstruct(self, dims: Optional[tuple] = None) -> DenseTensor:
        """Sum of the rank-one terms found so far."""
        if not self.terms:
            raise ConfigurationError("Empty greedy report has nothing to reconstruct")
        shape = dims or self.terms[0].dims
        total = np.zeros(shape)
        for term in self.terms:
            total += rank_one_expand(term, shape).array
        return DenseTensor(total)


def greedy_rank_r(
    A: DenseTensor,
    R: int,
    solver: Algorithm = Algorithm.HOSCF,
    opts: Optional[SolveOptions] = None,
    starts: int = 1,
) -> GreedyReport:
    """
    Deflate A term by term: A^(r+1) = A^(r) - best rank-one approximation of A^(r).

    Args:
        A: Tensor to approximate
        R: Number of rank-one terms
        solver: Inner rank-one solver
        opts: Inner solver options; term r runs with seed ``opts.seed + r``
        starts: Initial guesses per term; the largest |λ| is kept

    Returns:
        GreedyReport with R terms

    Raises:
        ConfigurationError: If R or starts is not positive
        GreedyAbortError: If an inner solve fails; ``details["report"]`` holds the
            terms deflated so far
    """
    if R < 1:
        raise ConfigurationError(f"Greedy rank must be positive, got {R}")
    if starts < 1:
        raise ConfigurationError(f"Starts per term must be positive, got {starts}")
    base = opts or SolveOptions()
    norm0 = frobenius_norm(A)
    report = GreedyReport(residual_norms=[norm0])
    residual = A

    for r in range(R):
        term_opts = base.with_seed(base.seed + r)
        try:
            if starts > 1:
                inner = multi_start(residual, solver, term_opts, starts=starts,
                                    first_seed=term_opts.seed).best
            else:
                inner = solve(residual, solver, term_opts)
        except SolverFailureError as e:
            logger.error("Greedy term %d failed: %s", r + 1, e.message)
            raise GreedyAbortError(
                f"Inner {Algorithm(solver).value} solve failed at term {r + 1}",
                details={"report": report, "cause": e},
            )

        residual = residual - rank_one_expand(inner.result, A.dims)
        norm = frobenius_norm(residual)
        report.terms.append(inner.result)
        report.reports.append(inner)
        report.residual_norms.append(norm)
        report.residual_ratios.append(norm / norm0 if norm0 > 0 else 0.0)
        logger.info(
            "Greedy term %d: lambda = %.10g, residual ratio = %.6g",
            r + 1, inner.weight, report.residual_ratios[-1],
        )
    return report
