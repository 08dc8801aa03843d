"""
Test tensors: the closed-form benchmark families, Gaussian tensors and builders
with a known decomposition.

Indices inside the closed-form formulas are 1-based, so entry ``A[i1-1, ..., id-1]``
is the formula evaluated at ``(i1, ..., id)``.
"""

from functools import reduce
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from .config import ExperimentSpec, Generator
from .exceptions import ConfigurationError, TensorShapeError
from .tensor_core import DenseTensor, FactorSet, load_dt1, rank_one_expand
from .utils import get_logger, make_rng

logger = get_logger(__name__)

ArcsinGrouping = Literal["product", "exponent"]


def _check_dims(dims: Sequence[int]) -> Tuple[int, ...]:
    dims = tuple(int(n) for n in dims)
    if len(dims) < 2:
        raise TensorShapeError(f"Tensors must have order d >= 2, got dims {dims}")
    if any(n < 1 for n in dims):
        raise TensorShapeError(f"Dimensions must be positive: {dims}")
    return dims


def _outer_sum(terms: Sequence[np.ndarray]) -> np.ndarray:
    """Entry (i1, ..., id) = terms[0][i1] + ... + terms[d-1][id]."""
    return reduce(np.add.outer, terms)


def gen_gaussian(dims: Sequence[int], seed: int = 0) -> DenseTensor:
    """I.i.d. standard normal entries."""
    dims = _check_dims(dims)
    return DenseTensor(make_rng(seed).standard_normal(dims))


def gen_exp(dims: Sequence[int]) -> DenseTensor:
    """Entry sum_j (-1)^(j+1) * j * exp(-i_j)."""
    dims = _check_dims(dims)
    terms = [
        (-1.0) ** (j + 1) * j * np.exp(-np.arange(1, n + 1, dtype=np.float64))
        for j, n in enumerate(dims, start=1)
    ]
    return DenseTensor(_outer_sum(terms))


def gen_arcsin(dims: Sequence[int], grouping: ArcsinGrouping = "product") -> DenseTensor:
    """
    Entry sum_j arcsin(s_j) when i_j >= j for every j, else 0.

    With the default ``"product"`` grouping s_j = (-1)^(i_j) * j / i_j. The
    ``"exponent"`` grouping reads the sign as (-1)^(i_j * j / i_j) = (-1)^j, so every
    argument is +-1 and the entries no longer depend on the index.

    Raises:
        ConfigurationError: On an unknown grouping or an argument outside [-1, 1]
    """
    dims = _check_dims(dims)
    if grouping not in ("product", "exponent"):
        raise ConfigurationError(f"Unknown arcsin grouping: {grouping}")

    terms = []
    masks = []
    for j, n in enumerate(dims, start=1):
        i = np.arange(1, n + 1, dtype=np.float64)
        valid = i >= j
        if grouping == "product":
            arg = np.where(valid, (-1.0) ** i * j / i, 0.0)
        else:
            arg = np.where(valid, (-1.0) ** j, 0.0)
        if np.any(np.abs(arg) > 1.0):
            raise ConfigurationError(f"arcsin argument outside [-1, 1] in mode {j}")
        terms.append(np.arcsin(arg))
        masks.append(valid.astype(np.float64))

    support = reduce(np.multiply.outer, masks)
    if not support.any():
        logger.warning("ARCSIN dims %s leave no index with i_j >= j; tensor is zero", dims)
    return DenseTensor(_outer_sum(terms) * support)


def gen_tan(dims: Sequence[int]) -> DenseTensor:
    """Entry tan(sum_j (-1)^(j+1) * i_j / j)."""
    dims = _check_dims(dims)
    terms = [
        (-1.0) ** (j + 1) * np.arange(1, n + 1, dtype=np.float64) / j
        for j, n in enumerate(dims, start=1)
    ]
    return DenseTensor(np.tan(_outer_sum(terms)))


def random_rank_one(dims: Sequence[int], seed: int = 0, weight: float = 1.0) -> DenseTensor:
    """``weight`` times the outer product of Gaussian unit vectors."""
    dims = _check_dims(dims)
    rng = make_rng(seed)
    F = FactorSet.from_vectors([rng.standard_normal(n) for n in dims], weight)
    return rank_one_expand(F, dims)


def odeco_tensor(
    weights: Sequence[float], dims: Sequence[int], seed: int = 0
) -> Tuple[DenseTensor, List[FactorSet]]:
    """
    Orthogonally decomposable tensor sum_r w_r * q_r^(1) o ... o q_r^(d).

    Factors of different terms are orthonormal in every mode, so greedy deflation
    recovers the terms exactly in decreasing order of |w_r|.

    Returns:
        (tensor, terms)

    Raises:
        TensorShapeError: If some mode is shorter than the number of terms
    """
    dims = _check_dims(dims)
    R = len(weights)
    if R < 1 or any(n < R for n in dims):
        raise TensorShapeError(f"{R} orthogonal terms do not fit into dims {dims}")
    rng = make_rng(seed)
    bases = [np.linalg.qr(rng.standard_normal((n, R)))[0] for n in dims]
    terms = [
        FactorSet(float(w), tuple(Q[:, r] for Q in bases)) for r, w in enumerate(weights)
    ]
    total = np.zeros(dims)
    for term in terms:
        total += rank_one_expand(term, dims).array
    return DenseTensor(total), terms


def generate(spec: ExperimentSpec, grouping: ArcsinGrouping = "product") -> DenseTensor:
    """Build the input tensor an experiment spec describes."""
    if spec.generator == Generator.FILE:
        if spec.input_path is None:
            raise ConfigurationError("Generator 'file' requires input_path")
        return load_dt1(spec.input_path)
    dims: Optional[Tuple[int, ...]] = spec.dims
    if dims is None:
        raise ConfigurationError(f"No dims for generator {spec.generator.value}")
    if spec.generator == Generator.GAUSSIAN:
        return gen_gaussian(dims, spec.tensor_seed)
    if spec.generator == Generator.EXP:
        return gen_exp(dims)
    if spec.generator == Generator.ARCSIN:
        return gen_arcsin(dims, grouping)
    if spec.generator == Generator.TAN:
        return gen_tan(dims)
    if spec.generator == Generator.RANK1:
        return random_rank_one(dims, spec.tensor_seed)
    raise ConfigurationError(f"Unknown generator: {spec.generator}")
