"""
Rank-one solvers: HOSCF, iHOSCF and the HOPM / ASVD baselines with their
Jacobi-style variants, over a shared options, stopping-rule and trace framework.
"""

import time
from abc import ABC, abstractmethod
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Type

import numpy as np

from .config import Algorithm, InitKind, PairSchedule, RqiAcceptRule, SolveOptions, StopRule
from .constants import DEGENERATE_BLOCK_TOL
from .exceptions import (
    ConfigurationError,
    SolverFailureError,
    TensorShapeError,
)
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
from .symmetric_eig import largest_magnitude_eigenpair, rayleigh_quotient_step
from .tensor_core import (
    DenseTensor,
    FactorSet,
    contract_all_but,
    frobenius_norm,
    multilinear_form,
)
from .utils import PhaseTimer, get_logger, make_rng

NAN = float("nan")


@dataclass
class IterationRecord:
    """One row of a solver trace."""

    k: int
    weight: float
    stop_value: float = NAN
    kkt_max: float = NAN
    eigenvalue: float = NAN
    rqi_accepted: bool = False
    pre_rqi_weight: float = NAN
    t_j_s: float = 0.0
    t_eig_s: float = 0.0
    t_other_s: float = 0.0


@dataclass
class SolveReport:
    """Outcome of one solve: final factors, convergence flag and per-iteration trace."""

    algorithm: str
    result: FactorSet
    converged: bool
    iterations: int
    trace: List[IterationRecord]
    stop_rule: StopRule
    initial_weight: float
    kkt: Optional[KktReport] = None
    eigenvector: Optional[StackedVector] = None
    restarts: int = 0
    seed: int = 0
    wall_s: float = 0.0

    @property
    def weight(self) -> float:
        return self.result.weight

    @property
    def phase_j_s(self) -> float:
        return float(sum(r.t_j_s for r in self.trace))

    @property
    def phase_eig_s(self) -> float:
        return float(sum(r.t_eig_s for r in self.trace))

    @property
    def phase_other_s(self) -> float:
        return float(sum(r.t_other_s for r in self.trace))

    @property
    def stop_values(self) -> np.ndarray:
        return np.array([r.stop_value for r in self.trace])

    def phase_fractions(self) -> Dict[str, float]:
        """Share of iteration time spent in J construction, eigenpair and the rest."""
        total = self.phase_j_s + self.phase_eig_s + self.phase_other_s
        if total == 0.0:
            return {"j": 0.0, "eig": 0.0, "other": 0.0}
        return {
            "j": self.phase_j_s / total,
            "eig": self.phase_eig_s / total,
            "other": self.phase_other_s / total,
        }


class _Degenerate(Exception):
    """Internal signal: an iterate lost a factor; carries the trace so far."""

    def __init__(self, modes: Sequence[int], trace: List[IterationRecord]):
        super().__init__(f"degenerate modes {list(modes)}")
        self.modes = list(modes)
        self.trace = trace


@dataclass
class _Run:
    """Mutable state of one attempt."""

    tensor: DenseTensor
    norm: float
    rule: StopRule
    pool: Optional[Executor]
    trace: List[IterationRecord] = field(default_factory=list)
    converged: bool = False
    eigenvector: Optional[StackedVector] = None


class RankOneSolver(ABC):
    """
    Base class for rank-one solvers.

    Subclasses implement ``_iterate``; the base class handles initial guesses,
    the single automatic restart on degeneracy, sign absorption and the final
    KKT evaluation.
    """

    algorithm: Algorithm
    default_stop_rule: StopRule = StopRule.KKT
    default_pairs: PairSchedule = PairSchedule.ADJACENT

    def __init__(self, options: Optional[SolveOptions] = None):
        """
        Initialize the solver.

        Args:
            options: Solver options (tol 1e-4 and 500 iterations by default)
        """
        self.options = options or SolveOptions()
        self.logger = get_logger(f"{__name__}.{self.__class__.__name__}")

    @property
    def stop_rule(self) -> StopRule:
        rule = self.options.stop_rule
        return self.default_stop_rule if rule == StopRule.AUTO else rule

    def _pairs(self) -> PairSchedule:
        schedule = self.options.pairs
        return self.default_pairs if schedule == PairSchedule.AUTO else schedule

    def solve(self, A: DenseTensor, initial: Optional[FactorSet] = None) -> SolveReport:
        """
        Compute a rank-one approximation of A.

        Args:
            A: Tensor of order d >= 2
            initial: Initial factors, required when ``options.init`` is ``provided``

        Returns:
            SolveReport with a non-negative final weight

        Raises:
            SolverFailureError: If the iterate degenerates twice
        """
        opts = self.options
        if opts.init == InitKind.PROVIDED and initial is None:
            raise ConfigurationError("init='provided' requires initial factors")
        start = time.perf_counter()
        norm = frobenius_norm(A)
        self.logger.info(
            "Starting %s on dims %s (seed %d, rule %s)",
            self.algorithm.value, A.dims, opts.seed, self.stop_rule.value,
        )

        if norm == 0.0:
            F0 = self._initial_factors(A, initial, attempt=0)
            self.logger.info("Zero tensor: every unit factor set is optimal")
            report = SolveReport(
                algorithm=self.algorithm.value, result=F0.with_weight(0.0), converged=True,
                iterations=0, trace=[], stop_rule=self.stop_rule, initial_weight=0.0,
                kkt=KktReport(0.0, tuple(0.0 for _ in A.dims)), seed=opts.seed,
            )
            report.wall_s = time.perf_counter() - start
            return report

        pool: Optional[ThreadPoolExecutor] = None
        if opts.threads > 1 and A.order > 2:
            pool = ThreadPoolExecutor(max_workers=opts.threads)
        try:
            for attempt in range(2):
                F0 = self._initial_factors(A, initial, attempt)
                run = _Run(tensor=A, norm=norm, rule=self.stop_rule, pool=pool)
                initial_weight = multilinear_form(A, F0.factors)
                try:
                    F = self._iterate(run, F0.with_weight(initial_weight))
                except _Degenerate as e:
                    if attempt == 0:
                        self.logger.warning(
                            "Degenerate factors on modes %s after %d iterations, restarting",
                            e.modes, len(e.trace),
                        )
                        continue
                    self.logger.error("Degenerate factors again on modes %s, giving up", e.modes)
                    partial = SolveReport(
                        algorithm=self.algorithm.value, result=F0, converged=False,
                        iterations=len(e.trace), trace=e.trace, stop_rule=self.stop_rule,
                        initial_weight=initial_weight, restarts=attempt, seed=opts.seed,
                    )
                    raise SolverFailureError(
                        f"{self.algorithm.value} failed: degenerate factors on modes {e.modes}",
                        details={"report": partial, "modes": e.modes},
                    )
                report = self._finalize(run, F, initial_weight, attempt)
                report.wall_s = time.perf_counter() - start
                return report
        finally:
            if pool is not None:
                pool.shutdown(wait=True)
        raise AssertionError("unreachable")  # pragma: no cover

    def _initial_factors(
        self, A: DenseTensor, initial: Optional[FactorSet], attempt: int
    ) -> FactorSet:
        """Provided factors on the first attempt, else uniform [0, 1] draws, normalized."""
        if self.options.init == InitKind.PROVIDED and attempt == 0 and initial is not None:
            if initial.dims != A.dims:
                raise TensorShapeError(
                    f"Initial factors have dims {initial.dims}, tensor has {A.dims}"
                )
            return FactorSet.from_vectors(initial.factors)
        rng = make_rng(self.options.seed, stream=attempt)
        return FactorSet.from_vectors([rng.uniform(0.0, 1.0, size=n) for n in A.dims])

    def _finalize(self, run: _Run, F: FactorSet, initial_weight: float, attempt: int) -> SolveReport:
        weight = multilinear_form(run.tensor, F.factors)
        result = F.with_weight(weight).absorb_sign()
        kkt = kkt_report(run.tensor, result)
        if run.trace and np.isnan(run.trace[-1].stop_value):
            # stopping value of the last iterate was never evaluated
            last = run.trace[-1]
            last.kkt_max = kkt.max_residual
            last.stop_value = kkt.max_residual / run.norm
            run.converged = last.stop_value <= self.options.tol
        if run.converged:
            self.logger.info(
                "%s converged in %d iterations, lambda = %.10g",
                self.algorithm.value, len(run.trace), result.weight,
            )
        else:
            self.logger.warning(
                "%s stopped after %d iterations without converging (lambda = %.10g)",
                self.algorithm.value, len(run.trace), result.weight,
            )
        return SolveReport(
            algorithm=self.algorithm.value,
            result=result,
            converged=run.converged,
            iterations=len(run.trace),
            trace=run.trace,
            stop_rule=run.rule,
            initial_weight=initial_weight,
            kkt=kkt,
            eigenvector=run.eigenvector,
            restarts=attempt,
            seed=self.options.seed,
        )

    def _build_j(self, run: _Run, F: FactorSet) -> SymBlockMatrix:
        opts = self.options
        return build_j(
            run.tensor, F, threads=opts.threads, executor=run.pool,
            deterministic=opts.deterministic, reuse_intermediates=opts.reuse_intermediates,
        )

    def _baseline_stop(
        self,
        run: _Run,
        F: FactorSet,
        F_prev: FactorSet,
        record: IterationRecord,
        prev_weight: float,
        timer: PhaseTimer,
    ) -> None:
        """Fill ``record.stop_value`` (and ``kkt_max`` when it is computed) for a baseline."""
        rule = run.rule
        if rule == StopRule.KKT:
            kkt = kkt_report(run.tensor, F)
            record.kkt_max = kkt.max_residual
            record.stop_value = kkt.max_residual / run.norm
        elif rule == StopRule.EQ11:
            with timer.phase("j"):
                J = self._build_j(run, F)
            record.stop_value = scf_stopping_value(J, stack_factors(F), record.weight)
        else:
            record.stop_value = _change_value(rule, F, F_prev, record.weight, prev_weight)

    def _log_iteration(self, record: IterationRecord) -> None:
        self.logger.debug(
            "%s k=%d lambda=%.12g stop=%.3e", self.algorithm.value, record.k, record.weight,
            record.stop_value,
        )

    @abstractmethod
    def _iterate(self, run: _Run, F0: FactorSet) -> FactorSet:
        """Run the iteration from F0, filling ``run``; return the last factor set."""


def _change_value(
    rule: StopRule, F: FactorSet, F_prev: FactorSet, weight: float, prev_weight: float
) -> float:
    """Stopping values of the change-based rules."""
    if rule == StopRule.LAMBDA:
        if prev_weight == 0.0:
            return 0.0 if weight == 0.0 else float("inf")
        return abs(weight - prev_weight) / abs(prev_weight)
    if rule == StopRule.ANGLE:
        cos = float(stack_factors(F).flat @ stack_factors(F_prev).flat)
        return float(np.sqrt(max(0.0, 1.0 - cos * cos)))
    raise ConfigurationError(f"Stop rule {rule.value} is not change-based")


def _unit(g: np.ndarray, mode: int, trace: List[IterationRecord]) -> np.ndarray:
    norm = float(np.linalg.norm(g))
    if norm <= DEGENERATE_BLOCK_TOL:
        raise _Degenerate([mode], trace)
    return g / norm


class HOSCFSolver(RankOneSolver):
    """
    Higher-order self-consistent field iteration.

    Each iteration takes the largest-magnitude eigenpair of J(x_{k-1}), splits the
    eigenvector into normalized blocks, and evaluates the stopping value with J at
    the new iterate, which is the matrix the next iteration needs anyway.
    """

    algorithm = Algorithm.HOSCF
    default_stop_rule = StopRule.EQ11

    def _iterate(self, run: _Run, F0: FactorSet) -> FactorSet:
        A = run.tensor
        d = A.order
        timer = PhaseTimer()
        with timer.phase("j"):
            J = self._build_j(run, F0)
        F, weight = F0, F0.weight

        for k in range(1, self.options.max_iters + 1):
            t_start = time.perf_counter_ns()
            timer.reset()
            with timer.phase("j"):
                S = J.dense()
            with timer.phase("eig"):
                pair = largest_magnitude_eigenpair(S)
            x = StackedVector(pair.vector, A.dims)
            F_new, flags = split_factors(x, tol=DEGENERATE_BLOCK_TOL)
            if any(flags):
                raise _Degenerate([n for n, f in enumerate(flags) if f], run.trace)
            with timer.phase("j"):
                J_new = self._build_j(run, F_new)
            new_weight = J_new.form_value(F_new.factors)

            record = IterationRecord(k=k, weight=new_weight, eigenvalue=pair.value)
            F_new, new_weight, J_new = self._refine(run, F_new, new_weight, J_new, record, timer)
            record.weight = new_weight

            new_tilde = stack_factors(F_new)
            Jx = J_new.matvec(new_tilde)
            residuals = [
                np.linalg.norm(np.sqrt(d) * Jx[new_tilde.block_slice(n)] - new_weight * u)
                for n, u in enumerate(F_new.factors)
            ]
            record.kkt_max = float(max(residuals))
            if run.rule == StopRule.EQ11:
                record.stop_value = scf_stopping_value(J_new, new_tilde, new_weight)
            elif run.rule == StopRule.KKT:
                record.stop_value = record.kkt_max / run.norm
            else:
                record.stop_value = _change_value(run.rule, F_new, F, new_weight, weight)

            elapsed = (time.perf_counter_ns() - t_start) * 1e-9
            record.t_j_s = timer.seconds("j")
            record.t_eig_s = timer.seconds("eig")
            record.t_other_s = max(0.0, elapsed - record.t_j_s - record.t_eig_s)
            run.trace.append(record)
            run.eigenvector = x
            self._log_iteration(record)

            F, weight, J = F_new, new_weight, J_new
            if record.stop_value <= self.options.tol:
                run.converged = True
                break
        return F

    def _refine(
        self,
        run: _Run,
        F: FactorSet,
        weight: float,
        J: SymBlockMatrix,
        record: IterationRecord,
        timer: PhaseTimer,
    ) -> Tuple[FactorSet, float, SymBlockMatrix]:
        """Hook between the eigenpair step and the stopping test; HOSCF keeps the iterate."""
        return F, weight, J


class IHOSCFSolver(HOSCFSolver):
    """
    HOSCF with one Rayleigh quotient iteration step per iteration.

    The step is taken against J at the freshly split iterate; its result is kept
    only if the multilinear value increases (in magnitude by default).
    """

    algorithm = Algorithm.IHOSCF

    def _refine(
        self,
        run: _Run,
        F: FactorSet,
        weight: float,
        J: SymBlockMatrix,
        record: IterationRecord,
        timer: PhaseTimer,
    ) -> Tuple[FactorSet, float, SymBlockMatrix]:
        record.pre_rqi_weight = weight
        with timer.phase("j"):
            S = J.dense()
        with timer.phase("eig"):
            outcome = rayleigh_quotient_step(S, stack_factors(F).flat)
        if not outcome.accepted or outcome.vector is None:
            self.logger.debug("RQI step rejected: %s", outcome.reason)
            return F, weight, J

        candidate, flags = split_factors(StackedVector(outcome.vector, F.dims),
                                         tol=DEGENERATE_BLOCK_TOL)
        if any(flags):
            return F, weight, J
        cand_weight = multilinear_form(run.tensor, candidate.factors)
        if self.options.rqi_accept_rule == RqiAcceptRule.MAGNITUDE:
            better = abs(cand_weight) > abs(weight)
        else:
            better = cand_weight > weight
        if not better:
            return F, weight, J

        record.rqi_accepted = True
        with timer.phase("j"):
            J_cand = self._build_j(run, candidate)
        return candidate, cand_weight, J_cand


class HOPMSolver(RankOneSolver):
    """Higher-order power method (ALS): block Gauss-Seidel sweeps over the modes."""

    algorithm = Algorithm.HOPM

    def _iterate(self, run: _Run, F0: FactorSet) -> FactorSet:
        A = run.tensor
        factors = list(F0.factors)
        F, weight = F0, F0.weight
        timer = PhaseTimer()
        for k in range(1, self.options.max_iters + 1):
            t_start = time.perf_counter_ns()
            timer.reset()
            new_weight = weight
            for n in range(A.order):
                g = contract_all_but(A, factors, (n,))
                factors[n] = _unit(g, n, run.trace)
                new_weight = float(g @ factors[n])
            F_new = FactorSet(new_weight, tuple(factors))
            record = IterationRecord(k=k, weight=new_weight)
            self._baseline_stop(run, F_new, F, record, weight, timer)
            _close_record(record, t_start, timer)
            run.trace.append(record)
            self._log_iteration(record)
            F, weight = F_new, new_weight
            if record.stop_value <= self.options.tol:
                run.converged = True
                break
        return F


class JacobiHOPMSolver(RankOneSolver):
    """
    Jacobi-style HOPM: every factor is recomputed from the previous iterate.

    The partial contractions of an iteration are exactly the KKT vectors of the
    previous iterate, so the KKT rule is evaluated one step late at no extra cost.
    """

    algorithm = Algorithm.JACOBI_HOPM

    def _iterate(self, run: _Run, F0: FactorSet) -> FactorSet:
        A = run.tensor
        F, weight = F0, F0.weight
        timer = PhaseTimer()
        for k in range(1, self.options.max_iters + 1):
            t_start = time.perf_counter_ns()
            timer.reset()
            gs = [contract_all_but(A, F.factors, (n,)) for n in range(A.order)]
            if run.rule == StopRule.KKT and run.trace:
                last = run.trace[-1]
                last.kkt_max = max(
                    float(np.linalg.norm(g - weight * u)) for g, u in zip(gs, F.factors)
                )
                last.stop_value = last.kkt_max / run.norm
                if last.stop_value <= self.options.tol:
                    run.converged = True
                    return F
            factors = tuple(_unit(g, n, run.trace) for n, g in enumerate(gs))
            new_weight = multilinear_form(A, factors)
            F_new = FactorSet(new_weight, factors)
            record = IterationRecord(k=k, weight=new_weight)
            if run.rule != StopRule.KKT:
                self._baseline_stop(run, F_new, F, record, weight, timer)
            _close_record(record, t_start, timer)
            run.trace.append(record)
            self._log_iteration(record)
            F, weight = F_new, new_weight
            if record.stop_value <= self.options.tol:
                run.converged = True
                break
        return F


def _pair_schedule(d: int, schedule: PairSchedule) -> Tuple[List[Tuple[int, int]], List[int]]:
    """Mode pairs of one ASVD cycle plus the modes left out of every pair."""
    if d == 2:
        return [(0, 1)], []
    if schedule == PairSchedule.ADJACENT:
        return [(n, (n + 1) % d) for n in range(d)], []
    pairs = [(n, n + 1) for n in range(0, d - 1, 2)]
    leftover = [d - 1] if d % 2 else []
    return pairs, leftover


def _top_singular_pair(
    M: np.ndarray, reference: np.ndarray
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Top singular triple, signed so the left vector does not turn against ``reference``."""
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    left, right = U[:, 0], Vt[0]
    if float(left @ reference) < 0.0:
        left, right = -left, -right
    return float(s[0]), left, right


def _pair_matrix(A: DenseTensor, factors: Sequence[np.ndarray], p: int, q: int) -> np.ndarray:
    """A_{p,q} with rows indexing mode p."""
    M = contract_all_but(A, factors, (p, q))
    return M if p < q else M.T


class ASVDSolver(RankOneSolver):
    """Alternating SVD: each mode pair takes the top singular pair of its intermediate matrix."""

    algorithm = Algorithm.ASVD

    def _iterate(self, run: _Run, F0: FactorSet) -> FactorSet:
        A = run.tensor
        pairs, leftover = _pair_schedule(A.order, self._pairs())
        factors = list(F0.factors)
        F, weight = F0, F0.weight
        timer = PhaseTimer()
        for k in range(1, self.options.max_iters + 1):
            t_start = time.perf_counter_ns()
            timer.reset()
            new_weight = weight
            for p, q in pairs:
                sigma, left, right = _top_singular_pair(_pair_matrix(A, factors, p, q), factors[p])
                if sigma <= DEGENERATE_BLOCK_TOL:
                    raise _Degenerate([p, q], run.trace)
                factors[p], factors[q] = left, right
                new_weight = sigma
            for n in leftover:
                g = contract_all_but(A, factors, (n,))
                factors[n] = _unit(g, n, run.trace)
                new_weight = float(g @ factors[n])
            F_new = FactorSet(new_weight, tuple(factors))
            record = IterationRecord(k=k, weight=new_weight)
            self._baseline_stop(run, F_new, F, record, weight, timer)
            _close_record(record, t_start, timer)
            run.trace.append(record)
            self._log_iteration(record)
            F, weight = F_new, new_weight
            if record.stop_value <= self.options.tol:
                run.converged = True
                break
        return F


class JacobiASVDSolver(RankOneSolver):
    """
    Jacobi-style ASVD: all pair matrices come from the previous iterate.

    The default schedule splits the modes into disjoint pairs (plus a power step
    on the odd mode out). With adjacent pairs, factor n takes the left singular
    vector of pair (n, n+1), so each factor changes once per iteration.
    """

    algorithm = Algorithm.JACOBI_ASVD
    default_pairs = PairSchedule.DISJOINT

    def _iterate(self, run: _Run, F0: FactorSet) -> FactorSet:
        A = run.tensor
        d = A.order
        schedule = self._pairs()
        pairs, leftover = _pair_schedule(d, schedule)
        adjacent = schedule == PairSchedule.ADJACENT and d > 2
        F, weight = F0, F0.weight
        timer = PhaseTimer()
        for k in range(1, self.options.max_iters + 1):
            t_start = time.perf_counter_ns()
            timer.reset()
            prev = F.factors
            factors = list(prev)
            for p, q in pairs:
                sigma, left, right = _top_singular_pair(_pair_matrix(A, prev, p, q), prev[p])
                if sigma <= DEGENERATE_BLOCK_TOL:
                    raise _Degenerate([p, q], run.trace)
                factors[p] = left
                if not adjacent:
                    factors[q] = right
            for n in leftover:
                factors[n] = _unit(contract_all_but(A, prev, (n,)), n, run.trace)
            new_weight = multilinear_form(A, factors)
            F_new = FactorSet(new_weight, tuple(factors))
            record = IterationRecord(k=k, weight=new_weight)
            self._baseline_stop(run, F_new, F, record, weight, timer)
            _close_record(record, t_start, timer)
            run.trace.append(record)
            self._log_iteration(record)
            F, weight = F_new, new_weight
            if record.stop_value <= self.options.tol:
                run.converged = True
                break
        return F


def _close_record(record: IterationRecord, t_start: int, timer: PhaseTimer) -> None:
    elapsed = (time.perf_counter_ns() - t_start) * 1e-9
    record.t_j_s = timer.seconds("j")
    record.t_other_s = max(0.0, elapsed - record.t_j_s)


SOLVERS: Dict[Algorithm, Type[RankOneSolver]] = {
    Algorithm.HOSCF: HOSCFSolver,
    Algorithm.IHOSCF: IHOSCFSolver,
    Algorithm.HOPM: HOPMSolver,
    Algorithm.JACOBI_HOPM: JacobiHOPMSolver,
    Algorithm.ASVD: ASVDSolver,
    Algorithm.JACOBI_ASVD: JacobiASVDSolver,
}


def solve(
    A: DenseTensor,
    algorithm: Algorithm = Algorithm.HOSCF,
    opts: Optional[SolveOptions] = None,
    initial: Optional[FactorSet] = None,
) -> SolveReport:
    """Run the named solver."""
    return SOLVERS[Algorithm(algorithm)](opts).solve(A, initial)


def hoscf(A: DenseTensor, opts: Optional[SolveOptions] = None,
          initial: Optional[FactorSet] = None) -> SolveReport:
    return HOSCFSolver(opts).solve(A, initial)


def ihoscf(A: DenseTensor, opts: Optional[SolveOptions] = None,
           initial: Optional[FactorSet] = None) -> SolveReport:
    return IHOSCFSolver(opts).solve(A, initial)


def hopm(A: DenseTensor, opts: Optional[SolveOptions] = None,
         initial: Optional[FactorSet] = None) -> SolveReport:
    return HOPMSolver(opts).solve(A, initial)


def jacobi_hopm(A: DenseTensor, opts: Optional[SolveOptions] = None,
                initial: Optional[FactorSet] = None) -> SolveReport:
    return JacobiHOPMSolver(opts).solve(A, initial)


def asvd(A: DenseTensor, opts: Optional[SolveOptions] = None,
         initial: Optional[FactorSet] = None) -> SolveReport:
    return ASVDSolver(opts).solve(A, initial)


def jacobi_asvd(A: DenseTensor, opts: Optional[SolveOptions] = None,
                initial: Optional[FactorSet] = None) -> SolveReport:
    return JacobiASVDSolver(opts).solve(A, initial)


@dataclass
class MultiStartResult:
    """All reports of a multi-start run (ordered by seed) and the best of them."""

    reports: List[SolveReport]

    @property
    def best(self) -> SolveReport:
        return max(self.reports, key=lambda r: abs(r.weight))


def multi_start(
    A: DenseTensor,
    algorithm: Algorithm = Algorithm.HOSCF,
    opts: Optional[SolveOptions] = None,
    starts: int = 10,
    first_seed: int = 0,
    workers: int = 1,
) -> MultiStartResult:
    """
    Solve from ``starts`` uniform initial guesses with seeds first_seed, first_seed+1, ...

    Independent starts run on a thread pool when ``workers > 1``; reports come back
    ordered by seed either way.
    """
    base = opts or SolveOptions()
    seeds = [first_seed + i for i in range(starts)]

    def run(seed: int) -> SolveReport:
        return solve(A, algorithm, base.with_seed(seed))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, seeds))
    else:
        reports = [run(seed) for seed in seeds]
    return MultiStartResult(reports=reports)


__all__ = [
    "IterationRecord", "SolveReport", "RankOneSolver", "HOSCFSolver", "IHOSCFSolver",
    "HOPMSolver", "JacobiHOPMSolver", "ASVDSolver", "JacobiASVDSolver", "SOLVERS", "solve",
    "hoscf", "ihoscf", "hopm", "jacobi_hopm", "asvd", "jacobi_asvd", "multi_start",
    "MultiStartResult",
]
