"""
Dense tensor storage and contraction primitives.

Tensors are stored as float64 numpy arrays indexed ``A[i1, ..., id]``; the flat
``data`` view and the ``.dt1`` file format use generalized column-major order
(``i1`` varies fastest). Modes are 0-based.
"""

import math
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from .constants import DENSE_RESIDUAL_LIMIT, DT1_MAGIC, UNIT_TOL
from .exceptions import (
    DegenerateFactorError,
    ModeError,
    TensorFileError,
    TensorShapeError,
)
from .utils import get_logger

logger = get_logger(__name__)

ContractionResult = Union["DenseTensor", np.ndarray, float]


class DenseTensor:
    """
    Order-d dense tensor, d >= 2.

    The wrapped array is read-only; every operation returns new storage.
    """

    def __init__(self, array: np.ndarray):
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim < 2:
            raise TensorShapeError(
                f"Tensors must have order d >= 2, got order {arr.ndim}",
                details={"shape": arr.shape},
            )
        if arr.size == 0:
            raise TensorShapeError("All dimensions must be >= 1", details={"shape": arr.shape})
        view = arr.view()
        view.flags.writeable = False
        self._array = view

    @classmethod
    def from_data(cls, dims: Sequence[int], data: Sequence[float]) -> "DenseTensor":
        """
        Build a tensor from a dimension vector and column-major flat data.

        Args:
            dims: Dimensions (I1, ..., Id)
            data: Flat values, length prod(dims), i1 fastest

        Returns:
            DenseTensor
        """
        dims = tuple(int(n) for n in dims)
        if any(n < 1 for n in dims):
            raise TensorShapeError(f"All dimensions must be >= 1, got {dims}")
        flat = np.asarray(data, dtype=np.float64).ravel()
        expected = int(np.prod(dims, dtype=np.int64))
        if flat.size != expected:
            raise TensorShapeError(
                f"Data length {flat.size} does not match prod(dims) = {expected}",
                details={"dims": dims},
            )
        return cls(flat.reshape(dims, order='F'))

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "DenseTensor":
        return cls(np.zeros(tuple(dims)))

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(self._array.shape)

    @property
    def order(self) -> int:
        return self._array.ndim

    @property
    def size(self) -> int:
        return int(self._array.size)

    @property
    def data(self) -> np.ndarray:
        """Flat column-major copy of the entries."""
        return self._array.ravel(order='F')

    def __getitem__(self, index: Tuple[int, ...]) -> float:
        return float(self._array[index])

    def __mul__(self, scalar: float) -> "DenseTensor":
        return DenseTensor(self._array * float(scalar))

    __rmul__ = __mul__

    def __sub__(self, other: "DenseTensor") -> "DenseTensor":
        _check_same_dims(self.dims, other.dims)
        return DenseTensor(self._array - other.array)

    def __add__(self, other: "DenseTensor") -> "DenseTensor":
        _check_same_dims(self.dims, other.dims)
        return DenseTensor(self._array + other.array)

    def permute(self, perm: Sequence[int]) -> "DenseTensor":
        """Reorder modes: mode k of the result is mode ``perm[k]`` of this tensor."""
        if sorted(perm) != list(range(self.order)):
            raise ModeError(f"Not a permutation of the {self.order} modes: {list(perm)}")
        return DenseTensor(np.transpose(self._array, perm))

    def __repr__(self) -> str:
        return f"DenseTensor(dims={self.dims})"


@dataclass(frozen=True, eq=False)
class FactorSet:
    """
    Candidate rank-one approximation ``weight * u1 o u2 o ... o ud``.

    ``weight`` is the scalar λ; NaN means "not set yet". Factors are unit vectors
    except for the modes listed in ``degenerate_modes``, which hold zero vectors.
    """

    weight: float
    factors: Tuple[np.ndarray, ...]
    degenerate_modes: Tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        factors = tuple(np.asarray(u, dtype=np.float64).ravel() for u in self.factors)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "degenerate_modes", tuple(sorted(set(self.degenerate_modes))))
        if len(factors) < 2:
            raise TensorShapeError(f"A factor set needs d >= 2 factors, got {len(factors)}")
        for n, u in enumerate(factors):
            if n in self.degenerate_modes:
                continue
            norm = float(np.linalg.norm(u))
            if abs(norm - 1.0) > UNIT_TOL:
                raise DegenerateFactorError(
                    f"Factor {n} is not a unit vector (norm {norm:.3e})", modes=[n]
                )

    @classmethod
    def from_vectors(cls, vectors: Sequence[np.ndarray], weight: float = float("nan")) -> "FactorSet":
        """Normalize arbitrary non-zero vectors into a factor set."""
        factors = []
        for n, v in enumerate(vectors):
            v = np.asarray(v, dtype=np.float64).ravel()
            norm = np.linalg.norm(v)
            if norm == 0.0:
                raise DegenerateFactorError(f"Factor {n} is the zero vector", modes=[n])
            factors.append(v / norm)
        return cls(weight=weight, factors=tuple(factors))

    @property
    def order(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(u.size for u in self.factors)

    @property
    def is_degenerate(self) -> bool:
        return bool(self.degenerate_modes)

    def with_weight(self, weight: float) -> "FactorSet":
        return FactorSet(weight, self.factors, self.degenerate_modes)

    def absorb_sign(self) -> "FactorSet":
        """Make the weight non-negative by flipping the first factor."""
        if self.weight >= 0:
            return self
        factors = (-self.factors[0],) + self.factors[1:]
        return FactorSet(-self.weight, factors, self.degenerate_modes)

    def permute(self, perm: Sequence[int]) -> "FactorSet":
        return FactorSet(self.weight, tuple(self.factors[p] for p in perm))


def _check_same_dims(a: Sequence[int], b: Sequence[int]) -> None:
    if tuple(a) != tuple(b):
        raise TensorShapeError(f"Shape mismatch: {tuple(a)} vs {tuple(b)}")


def _check_mode(order: int, n: int) -> None:
    if not 0 <= n < order:
        raise ModeError(f"Mode {n} out of range for an order-{order} tensor")


def _check_factors(dims: Sequence[int], factors: Sequence[np.ndarray]) -> None:
    if len(factors) != len(dims):
        raise TensorShapeError(f"Expected {len(dims)} factors, got {len(factors)}")
    for n, (size, u) in enumerate(zip(dims, factors)):
        if u.size != size:
            raise TensorShapeError(
                f"Factor {n} has length {u.size}, mode {n} has dimension {size}"
            )


def _wrap(array: np.ndarray) -> ContractionResult:
    if array.ndim == 0:
        return float(array)
    if array.ndim == 1:
        return array
    return DenseTensor(array)


def contract_modes(
    array: np.ndarray, contractions: Sequence[Tuple[int, np.ndarray]]
) -> np.ndarray:
    """
    Contract an ndarray with vectors, one mode at a time, in the order given.

    Modes are those of the original array; remaining axes keep their relative order.
    """
    done: List[int] = []
    for mode, vec in contractions:
        axis = mode - sum(1 for m in done if m < mode)
        array = np.tensordot(array, vec, axes=([axis], [0]))
        done.append(mode)
    return np.asarray(array)


def contract_all_but(
    A: DenseTensor, factors: Sequence[np.ndarray], keep: Sequence[int]
) -> np.ndarray:
    """
    Contract every mode not in ``keep`` with its factor.

    The largest remaining mode is contracted first so intermediates shrink as fast
    as possible. Kept modes stay in increasing order.
    """
    kept = set(keep)
    for m in kept:
        _check_mode(A.order, m)
    modes = [m for m in range(A.order) if m not in kept]
    modes.sort(key=lambda m: (A.dims[m], m), reverse=True)
    return contract_modes(A.array, [(m, factors[m]) for m in modes])


def matricize(A: DenseTensor, n: int) -> np.ndarray:
    """
    Mode-n matricization.

    Column j of the result collects index tuples with
    ``j = sum_{k != n} i_k * J_k``, ``J_k = prod_{l < k, l != n} I_l``.

    Args:
        A: Tensor
        n: Mode (0-based)

    Returns:
        Matrix of shape (I_n, prod_{k != n} I_k)
    """
    _check_mode(A.order, n)
    return np.moveaxis(A.array, n, 0).reshape(A.dims[n], -1, order='F')


def dematricize(M: np.ndarray, n: int, dims: Sequence[int]) -> DenseTensor:
    """Inverse of :func:`matricize` for the given dimensions."""
    dims = tuple(dims)
    _check_mode(len(dims), n)
    rest = dims[:n] + dims[n + 1:]
    if M.shape != (dims[n], int(np.prod(rest, dtype=np.int64))):
        raise TensorShapeError(f"Matrix of shape {M.shape} does not unfold dims {dims} at mode {n}")
    arr = np.asarray(M, dtype=np.float64).reshape((dims[n],) + rest, order='F')
    return DenseTensor(np.moveaxis(arr, 0, n))


def ttv(A: DenseTensor, v: np.ndarray, n: int) -> ContractionResult:
    """
    Tensor-times-vector along mode n.

    Returns a DenseTensor of order d-1, or a plain vector when d == 2.
    """
    _check_mode(A.order, n)
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != A.dims[n]:
        raise TensorShapeError(f"Vector length {v.size} does not match I_{n} = {A.dims[n]}")
    return _wrap(np.tensordot(A.array, v, axes=([n], [0])))


def ttvc(A: DenseTensor, vs: Sequence[np.ndarray], modes: Sequence[int]) -> ContractionResult:
    """
    Tensor-times-vector chain over distinct modes.

    Modes are contracted in descending order. Contracting all d modes gives a
    plain float; d - 1 modes give a vector.
    """
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise ModeError(f"Duplicate modes in {modes}")
    if len(vs) != len(modes):
        raise TensorShapeError(f"{len(vs)} vectors given for {len(modes)} modes")
    pairs = []
    for m, v in zip(modes, vs):
        _check_mode(A.order, m)
        v = np.asarray(v, dtype=np.float64).ravel()
        if v.size != A.dims[m]:
            raise TensorShapeError(f"Vector length {v.size} does not match I_{m} = {A.dims[m]}")
        pairs.append((m, v))
    pairs.sort(key=lambda p: p[0], reverse=True)
    if not pairs:
        return A
    return _wrap(contract_modes(A.array, pairs))


def multilinear_form(A: DenseTensor, factors: Sequence[np.ndarray]) -> float:
    """Full contraction ``A x1 u1 x2 u2 ... xd ud``."""
    _check_factors(A.dims, [np.asarray(u).ravel() for u in factors])
    return float(ttvc(A, list(factors), list(range(A.order))))


def frobenius_norm(A: DenseTensor) -> float:
    return float(np.linalg.norm(A.array.ravel()))


def rank_one_expand(F: FactorSet, dims: Sequence[int]) -> DenseTensor:
    """
    Dense ``weight * u1 o ... o ud``.

    Raises:
        TensorShapeError: If factor lengths do not match ``dims``
    """
    _check_factors(tuple(dims), F.factors)
    outer = reduce(np.multiply.outer, F.factors)
    return DenseTensor(F.weight * outer)


def residual_norm(
    A: DenseTensor, F: FactorSet, dense_limit: int = DENSE_RESIDUAL_LIMIT
) -> float:
    """
    Frobenius distance between A and the expansion of F.

    Small tensors are subtracted densely. Above ``dense_limit`` entries the
    expansion-free form ``|A|^2 - 2 w <A, u1 o ... o ud> + w^2`` is used, which
    is exact for unit factors but loses digits when the residual is tiny.
    """
    _check_factors(A.dims, F.factors)
    if A.size <= dense_limit:
        return frobenius_norm(A - rank_one_expand(F, A.dims))
    logger.debug("Expansion-free residual for %d entries", A.size)
    norm_sq = frobenius_norm(A) ** 2
    value = norm_sq - 2.0 * F.weight * multilinear_form(A, F.factors) + F.weight ** 2
    return float(np.sqrt(max(value, 0.0)))


def rank_one_tensor(weight: float, vectors: Sequence[np.ndarray]) -> DenseTensor:
    """Convenience: expand ``weight`` times the outer product of normalized vectors."""
    F = FactorSet.from_vectors(vectors, weight)
    return rank_one_expand(F, F.dims)


def save_dt1(tensor: Union[DenseTensor, np.ndarray], path: Union[str, Path]) -> None:
    """
    Write a tensor (or a dense matrix) as a ``.dt1`` file.

    Layout: magic ``DTEN1\\0``, u8 order, order x u64 LE dims, then the entries as
    f64 LE in column-major order.
    """
    array = tensor.array if isinstance(tensor, DenseTensor) else np.asarray(tensor, np.float64)
    if array.ndim < 1 or array.ndim > 255:
        raise TensorFileError(f"Cannot store an order-{array.ndim} array")
    try:
        with open(path, 'wb') as fh:
            fh.write(DT1_MAGIC)
            fh.write(np.uint8(array.ndim).tobytes())
            fh.write(np.asarray(array.shape, dtype='<u8').tobytes())
            fh.write(np.asarray(array, dtype='<f8').tobytes(order='F'))
    except OSError as e:
        raise TensorFileError(f"Failed to write tensor file {path}: {str(e)}")


def load_dt1(path: Union[str, Path]) -> DenseTensor:
    """
    Read a ``.dt1`` tensor file, validating magic and exact length.

    Raises:
        TensorFileError: On IO errors, bad magic or a length mismatch
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise TensorFileError(f"Failed to read tensor file {path}: {str(e)}")

    header = len(DT1_MAGIC) + 1
    if len(raw) < header or raw[:len(DT1_MAGIC)] != DT1_MAGIC:
        raise TensorFileError(f"{path} is not a .dt1 tensor file (bad magic)")
    order = raw[len(DT1_MAGIC)]
    dims_end = header + 8 * order
    if len(raw) < dims_end:
        raise TensorFileError(f"{path} is truncated inside the dimension vector")
    dims = tuple(int(n) for n in np.frombuffer(raw[header:dims_end], dtype='<u8'))
    count = math.prod(dims)
    if len(raw) != dims_end + 8 * count:
        raise TensorFileError(
            f"{path} holds {len(raw) - dims_end} data bytes, expected {8 * count}",
            details={"dims": dims},
        )
    values = np.frombuffer(raw[dims_end:], dtype='<f8')
    try:
        return DenseTensor.from_data(dims, values)
    except TensorShapeError as e:
        raise TensorFileError(f"Invalid tensor in {path}: {e.message}", details={"dims": dims})
