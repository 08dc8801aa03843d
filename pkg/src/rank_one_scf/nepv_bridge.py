"""
Bridge between rank-one approximation and the nonlinear eigenproblem J(x) x = λ x.

J(x) is the symmetric block matrix with zero diagonal blocks and off-diagonal
blocks A_{m,n}(x) / (d - 1), where A_{m,n}(x) contracts the tensor with every
factor except modes m and n.
"""

from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .constants import STACK_UNIT_TOL
from .exceptions import ConfigurationError, DegenerateFactorError, ModeError, TensorShapeError
from .tensor_core import (
    DenseTensor,
    FactorSet,
    _check_factors,
    _check_mode,
    contract_all_but,
    contract_modes,
    multilinear_form,
    save_dt1,
)
from .utils import get_logger

logger = get_logger(__name__)

Pair = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class StackedVector:
    """Flat vector of length sum(I_n) split into d consecutive blocks."""

    flat: np.ndarray
    dims: Tuple[int, ...]

    def __post_init__(self) -> None:
        flat = np.asarray(self.flat, dtype=np.float64).ravel()
        dims = tuple(int(n) for n in self.dims)
        if flat.size != sum(dims):
            raise TensorShapeError(f"Flat length {flat.size} does not partition into {dims}")
        object.__setattr__(self, "flat", flat)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_blocks(cls, blocks: Sequence[np.ndarray]) -> "StackedVector":
        blocks = [np.asarray(b, dtype=np.float64).ravel() for b in blocks]
        return cls(np.concatenate(blocks), tuple(b.size for b in blocks))

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def offsets(self) -> Tuple[int, ...]:
        return tuple(int(o) for o in np.concatenate(([0], np.cumsum(self.dims))))

    def block_slice(self, n: int) -> slice:
        off = self.offsets
        return slice(off[n], off[n + 1])

    @property
    def blocks(self) -> List[np.ndarray]:
        return [self.flat[self.block_slice(n)] for n in range(self.order)]

    @property
    def block_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(b) for b in self.blocks])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.flat))

    def __neg__(self) -> "StackedVector":
        return StackedVector(-self.flat, self.dims)


@dataclass(frozen=True, eq=False)
class SymBlockMatrix:
    """
    J(x), stored as its strictly upper blocks A_{m,n} (m < n) and the scale 1/(d-1).

    Diagonal blocks are zero and block (n, m) is the transpose of block (m, n).
    """

    block_dims: Tuple[int, ...]
    upper_blocks: Dict[Pair, np.ndarray]
    scale: float = field(default=float("nan"))

    def __post_init__(self) -> None:
        d = len(self.block_dims)
        if d < 2:
            raise TensorShapeError("J(x) needs d >= 2 blocks")
        if np.isnan(self.scale):
            object.__setattr__(self, "scale", 1.0 / (d - 1))
        for (m, n), block in self.upper_blocks.items():
            if not m < n or block.shape != (self.block_dims[m], self.block_dims[n]):
                raise TensorShapeError(f"Block {(m, n)} has shape {block.shape}")

    @property
    def order(self) -> int:
        return len(self.block_dims)

    @property
    def size(self) -> int:
        return int(sum(self.block_dims))

    def dense(self) -> np.ndarray:
        """Materialize the symmetric sum(I_n) x sum(I_n) matrix."""
        off = np.concatenate(([0], np.cumsum(self.block_dims)))
        S = np.zeros((self.size, self.size))
        for (m, n), block in self.upper_blocks.items():
            scaled = self.scale * block
            S[off[m]:off[m + 1], off[n]:off[n + 1]] = scaled
            S[off[n]:off[n + 1], off[m]:off[m + 1]] = scaled.T
        return S

    def matvec(self, x: Union[StackedVector, np.ndarray]) -> np.ndarray:
        """J x computed block by block."""
        flat = x.flat if isinstance(x, StackedVector) else np.asarray(x, dtype=np.float64)
        v = StackedVector(flat, self.block_dims)
        blocks = v.blocks
        out = [np.zeros(n) for n in self.block_dims]
        for (m, n), block in self.upper_blocks.items():
            out[m] += block @ blocks[n]
            out[n] += block.T @ blocks[m]
        return self.scale * np.concatenate(out)

    def frobenius_norm(self) -> float:
        """|J|_F from the blocks: sqrt(2 sum |A_mn|_F^2) / (d - 1)."""
        total = sum(float(np.sum(b * b)) for b in self.upper_blocks.values())
        return float(np.sqrt(2.0 * total) * self.scale)

    def form_value(self, factors: Sequence[np.ndarray]) -> float:
        """
        A(u_1, ..., u_d) read off block (0, 1), valid when J was built at ``factors``.

        Costs one I_0 x I_1 bilinear form instead of a pass over the tensor.
        """
        return float(factors[0] @ self.upper_blocks[(0, 1)] @ factors[1])

    def export(self, path: Union[str, Path]) -> None:
        """Write the dense matrix as an order-2 .dt1 file."""
        save_dt1(self.dense(), path)


@dataclass(frozen=True, eq=False)
class KktReport:
    """Multilinear value λ and the per-mode KKT residuals |A x_{-n} u - λ u_n|."""

    weight: float
    per_mode_residuals: Tuple[float, ...]

    @property
    def max_residual(self) -> float:
        return float(max(self.per_mode_residuals))


def split_factors(x: StackedVector, tol: float = 0.0) -> Tuple[FactorSet, Tuple[bool, ...]]:
    """
    Normalize each block of x into a factor.

    Blocks with norm <= tol become zero vectors and are flagged; nothing is raised.

    Returns:
        (FactorSet with unset weight, per-mode degeneracy flags)
    """
    factors = []
    flags = []
    for block in x.blocks:
        norm = float(np.linalg.norm(block))
        if norm <= tol:
            factors.append(np.zeros_like(block))
            flags.append(True)
        else:
            factors.append(block / norm)
            flags.append(False)
    degenerate = tuple(n for n, flag in enumerate(flags) if flag)
    return FactorSet(float("nan"), tuple(factors), degenerate), tuple(flags)


def stack_factors(F: FactorSet) -> StackedVector:
    """x = [u1; ...; ud] / sqrt(d), a unit vector for unit factors."""
    if F.is_degenerate:
        raise DegenerateFactorError(
            "Cannot stack a degenerate factor set", modes=list(F.degenerate_modes)
        )
    for n, u in enumerate(F.factors):
        norm = float(np.linalg.norm(u))
        if abs(norm - 1.0) > STACK_UNIT_TOL:
            raise DegenerateFactorError(f"Factor {n} is not a unit vector (norm {norm:.3e})",
                                        modes=[n])
    return StackedVector.from_blocks([u / np.sqrt(F.order) for u in F.factors])


def flip_first_block(x: StackedVector) -> StackedVector:
    flat = x.flat.copy()
    flat[x.block_slice(0)] *= -1.0
    return StackedVector(flat, x.dims)


def _require_contractible(F: FactorSet, modes: Sequence[int]) -> None:
    bad = [m for m in modes if m in F.degenerate_modes]
    if bad:
        raise DegenerateFactorError(f"Degenerate factor on contracted modes {bad}", modes=bad)


def build_block(A: DenseTensor, F: FactorSet, m: int, n: int) -> np.ndarray:
    """
    A_{m,n}(x): contract every mode except m and n; rows index mode m.

    Raises:
        ModeError: If m == n or a mode is out of range
        DegenerateFactorError: If a contracted factor is degenerate
    """
    _check_mode(A.order, m)
    _check_mode(A.order, n)
    if m == n:
        raise ModeError(f"Block modes must differ, got m = n = {m}")
    _check_factors(A.dims, F.factors)
    _require_contractible(F, [k for k in range(A.order) if k not in (m, n)])
    block = contract_all_but(A, F.factors, (m, n))
    return block if m < n else block.T


def _row_blocks(prefix: np.ndarray, factors: Sequence[np.ndarray], m: int) -> Dict[Pair, np.ndarray]:
    """Blocks (m, n), n > m, from a prefix whose axis 0 is mode m and whose modes < m are gone."""
    d = len(factors)
    out = {}
    for n in range(m + 1, d):
        # prefix axis k holds original mode m + k
        contractions = [(k - m, factors[k]) for k in range(d - 1, m, -1) if k != n]
        out[(m, n)] = contract_modes(prefix, contractions)
    return out


def _build_reusing(A: DenseTensor, F: FactorSet, pool: Optional[Executor]) -> Dict[Pair, np.ndarray]:
    """Share the prefix contractions A x1 u1 ... x_{m-1} u_{m-1} between rows of J."""
    prefixes = [A.array]
    for m in range(A.order - 2):
        prefixes.append(np.tensordot(prefixes[-1], F.factors[m], axes=([0], [0])))
    rows = range(A.order - 1)
    if pool is None:
        results = [_row_blocks(prefixes[m], F.factors, m) for m in rows]
    else:
        results = list(pool.map(lambda m: _row_blocks(prefixes[m], F.factors, m), rows))
    blocks: Dict[Pair, np.ndarray] = {}
    for row in results:
        blocks.update(row)
    return blocks


def build_j(
    A: DenseTensor,
    F: FactorSet,
    threads: int = 1,
    executor: Optional[Executor] = None,
    deterministic: bool = True,
    reuse_intermediates: bool = False,
) -> SymBlockMatrix:
    """
    Assemble J(x) for the factor set F.

    The d(d-1)/2 blocks are independent; with ``threads > 1`` (or a caller-provided
    ``executor``) they are computed concurrently into disjoint storage. Each block is
    computed by the same serial contraction whatever the thread count, so the result
    does not depend on it. ``reuse_intermediates`` shares partial contractions between
    blocks, which changes the summation order and therefore needs
    ``deterministic=False``.

    Raises:
        DegenerateFactorError: If any factor is a zero block
    """
    _check_factors(A.dims, F.factors)
    if F.is_degenerate:
        raise DegenerateFactorError(
            "Cannot build J from a degenerate factor set", modes=list(F.degenerate_modes)
        )
    if reuse_intermediates and deterministic:
        raise ConfigurationError("reuse_intermediates requires deterministic=False")

    pairs = list(combinations(range(A.order), 2))
    own_pool: Optional[ThreadPoolExecutor] = None
    pool: Optional[Executor] = executor
    if pool is None and threads > 1 and len(pairs) > 1:
        own_pool = ThreadPoolExecutor(max_workers=threads)
        pool = own_pool
    try:
        if reuse_intermediates:
            blocks = _build_reusing(A, F, pool)
        elif pool is None:
            blocks = {(m, n): build_block(A, F, m, n) for m, n in pairs}
        else:
            computed = pool.map(lambda p: build_block(A, F, p[0], p[1]), pairs)
            blocks = dict(zip(pairs, computed))
    finally:
        if own_pool is not None:
            own_pool.shutdown(wait=True)

    return SymBlockMatrix(block_dims=A.dims, upper_blocks=blocks)


def partial_contraction(A: DenseTensor, F: FactorSet, n: int) -> np.ndarray:
    """A x_{-n} u: contract every mode but n."""
    _check_mode(A.order, n)
    _require_contractible(F, [k for k in range(A.order) if k != n])
    return contract_all_but(A, F.factors, (n,))


def kkt_report(A: DenseTensor, F: FactorSet) -> KktReport:
    """
    Evaluate the KKT system at F.

    λ is the full contraction; residual n is |A x_{-n} u - λ u_n|_2.
    """
    _check_factors(A.dims, F.factors)
    if F.is_degenerate:
        raise DegenerateFactorError(
            "KKT residuals need unit factors", modes=list(F.degenerate_modes)
        )
    weight = multilinear_form(A, F.factors)
    residuals = tuple(
        float(np.linalg.norm(partial_contraction(A, F, n) - weight * F.factors[n]))
        for n in range(A.order)
    )
    return KktReport(weight=weight, per_mode_residuals=residuals)


def scf_stopping_value(J: SymBlockMatrix, x: StackedVector, weight: float) -> float:
    """
    Residual quotient |J x - ρ x|_2 / (|J|_F + |λ|), ρ = x'Jx.

    Args:
        J: Symmetric block matrix
        x: Unit stacked vector
        weight: Current λ

    Returns:
        Non-negative stopping value
    """
    Jx = J.matvec(x)
    rho = float(x.flat @ Jx)
    numerator = float(np.linalg.norm(Jx - rho * x.flat))
    denominator = J.frobenius_norm() + abs(weight)
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else float("inf")
    return numerator / denominator
