"""
Test the J(x) construction, block splitting and KKT / stopping quantities.
"""

import itertools

import numpy as np
import pytest
from rank_one_scf.exceptions import (
    ConfigurationError,
    DegenerateFactorError,
    ModeError,
    TensorShapeError,
)
from rank_one_scf.nepv_bridge import (
    StackedVector,
    SymBlockMatrix,
    build_block,
    build_j,
    flip_first_block,
    kkt_report,
    partial_contraction,
    scf_stopping_value,
    split_factors,
    stack_factors,
)
from rank_one_scf.tensor_core import (
    DenseTensor,
    FactorSet,
    load_dt1,
    multilinear_form,
    rank_one_tensor,
)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def random_factors(rng, dims):
    return FactorSet.from_vectors([rng.standard_normal(n) for n in dims])


def random_case(rng, dims):
    return DenseTensor(rng.standard_normal(dims)), random_factors(rng, dims)


class TestStackedVector:
    """Test cases for stacking and splitting."""

    def test_stack_two_factors(self, rng):
        """Test d = 2 stacking divides by sqrt(2)."""
        F = random_factors(rng, (3, 4))
        x = stack_factors(F)
        assert np.allclose(x.flat, np.concatenate(F.factors) / np.sqrt(2))
        assert x.norm == pytest.approx(1.0, abs=1e-12)

    def test_block_norms_order_four(self, rng):
        """Test every block of a stacked d = 4 set has norm 1/2."""
        x = stack_factors(random_factors(rng, (2, 3, 4, 5)))
        assert np.allclose(x.block_norms, 0.5)

    def test_split_inverts_stack(self, rng):
        """Test split(stack(F)) returns the factors with no flags."""
        F = random_factors(rng, (3, 2, 4))
        G, flags = split_factors(stack_factors(F))
        assert flags == (False, False, False)
        for u, v in zip(F.factors, G.factors):
            assert np.allclose(u, v, atol=1e-14)
        assert np.isnan(G.weight)

    def test_split_zero_block(self):
        """Test a zero block is flagged, not raised."""
        x = StackedVector(np.array([1.0, 0.0, 0.0, 0.0, 2.0]), (2, 2, 1))
        F, flags = split_factors(x)
        assert flags == (False, True, False)
        assert np.array_equal(F.factors[1], [0.0, 0.0])
        assert F.degenerate_modes == (1,)

    def test_split_unequal_norms(self):
        """Test blocks are rescaled individually."""
        x = StackedVector(np.array([0.3, 0.0, 0.0, np.sqrt(1 - 0.09)]), (2, 2))
        F, _ = split_factors(x)
        assert np.allclose(F.factors[0], [1.0, 0.0])
        assert np.allclose(F.factors[1], [0.0, 1.0])
        assert np.linalg.norm(np.concatenate(F.factors)) == pytest.approx(np.sqrt(2))

    def test_stack_rejects_degenerate(self):
        """Test degenerate sets cannot be stacked."""
        F = FactorSet(float("nan"), (np.zeros(2), np.array([1.0, 0.0])), (0,))
        with pytest.raises(DegenerateFactorError):
            stack_factors(F)

    def test_partition_mismatch(self):
        """Test flat length must equal sum(dims)."""
        with pytest.raises(TensorShapeError):
            StackedVector(np.ones(4), (2, 3))

    def test_flip(self, rng):
        """Test flipping negates block 0 only and is an involution."""
        x = stack_factors(random_factors(rng, (3, 3, 3)))
        y = flip_first_block(x)
        assert np.array_equal(y.blocks[0], -x.blocks[0])
        assert np.array_equal(y.blocks[2], x.blocks[2])
        assert y.norm == pytest.approx(x.norm)
        assert np.array_equal(flip_first_block(y).flat, x.flat)


class TestBuildBlock:
    """Test cases for single blocks of J."""

    def test_matrix_case(self, rng):
        """Test the only block of a matrix is the matrix."""
        A, F = random_case(rng, (4, 6))
        assert np.array_equal(build_block(A, F, 0, 1), A.array)

    def test_rank_one(self, rng):
        """Test A_{0,1} of u o v o w at its own factors is u v'."""
        F = random_factors(rng, (3, 4, 5))
        A = rank_one_tensor(1.0, F.factors)
        assert np.allclose(build_block(A, F, 0, 1), np.outer(F.factors[0], F.factors[1]))

    def test_brute_force(self, rng):
        """Test block (0, 2) of a 2x2x2 tensor against a triple sum."""
        A, F = random_case(rng, (2, 2, 2))
        u = F.factors[1]
        expected = np.array([
            [sum(A[i, j, k] * u[j] for j in range(2)) for k in range(2)] for i in range(2)
        ])
        assert np.allclose(build_block(A, F, 0, 2), expected, atol=1e-12)

    def test_transposed_order(self, rng):
        """Test block (n, m) is the transpose of block (m, n)."""
        A, F = random_case(rng, (2, 3, 4))
        assert np.array_equal(build_block(A, F, 2, 0), build_block(A, F, 0, 2).T)

    def test_equal_modes(self, rng):
        """Test m == n is rejected."""
        A, F = random_case(rng, (2, 3, 4))
        with pytest.raises(ModeError):
            build_block(A, F, 1, 1)

    def test_degenerate_contracted_mode(self, rng):
        """Test a zero factor on a contracted mode is an error."""
        A, F = random_case(rng, (2, 2, 2))
        G = FactorSet(float("nan"), (F.factors[0], F.factors[1], np.zeros(2)), (2,))
        with pytest.raises(DegenerateFactorError):
            build_block(A, G, 0, 1)
        assert build_block(A, G, 0, 2).shape == (2, 2)


class TestBuildJ:
    """Test cases for the assembled J(x)."""

    def test_matrix_case(self, rng):
        """Test d = 2 gives [[0, A], [A', 0]] with scale 1."""
        A, F = random_case(rng, (3, 5))
        J = build_j(A, F)
        S = J.dense()
        assert J.scale == 1.0
        assert np.array_equal(S[:3, 3:], A.array)
        assert np.array_equal(S[3:, :3], A.array.T)
        assert np.all(S[:3, :3] == 0.0)

    def test_all_ones(self):
        """Test every block of the all-ones 2x2x2 case at (1, 1)/sqrt(2)."""
        A = DenseTensor(np.ones((2, 2, 2)))
        F = FactorSet.from_vectors([np.ones(2)] * 3)
        J = build_j(A, F)
        for block in J.upper_blocks.values():
            assert np.allclose(block, np.sqrt(2) * np.ones((2, 2)))
        assert J.scale == 0.5

    def test_dense_is_symmetric(self, rng):
        """Test the materialized matrix is exactly symmetric with zero diagonal blocks."""
        A, F = random_case(rng, (3, 4, 2, 3))
        S = build_j(A, F).dense()
        assert np.array_equal(S, S.T)
        assert np.all(S[3:7, 3:7] == 0.0)

    @pytest.mark.parametrize("dims", [(4, 5), (3, 4, 5), (2, 3, 3, 2), (2, 2, 3, 2, 2)])
    def test_rayleigh_identity(self, rng, dims):
        """Test x'J(x)x equals the multilinear form at the factors."""
        A, F = random_case(rng, dims)
        x = stack_factors(F).flat
        value = x @ build_j(A, F).dense() @ x
        assert value == pytest.approx(multilinear_form(A, F.factors), rel=1e-10)

    def test_matvec_matches_dense(self, rng):
        """Test block matvec against the dense product."""
        A, F = random_case(rng, (3, 4, 5))
        J = build_j(A, F)
        v = rng.standard_normal(J.size)
        assert np.allclose(J.matvec(v), J.dense() @ v)

    @pytest.mark.parametrize("dims", [(4, 6), (3, 4, 5), (2, 3, 2, 3)])
    def test_form_value(self, rng, dims):
        """Test the weight read off block (0, 1) equals A(u_1, ..., u_d)."""
        A, F = random_case(rng, dims)
        J = build_j(A, F)
        expected = multilinear_form(A, F.factors)
        assert J.form_value(F.factors) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_frobenius_from_blocks(self, rng):
        """Test the block formula for |J|_F."""
        A, F = random_case(rng, (3, 4, 5))
        J = build_j(A, F)
        assert J.frobenius_norm() == pytest.approx(np.linalg.norm(J.dense()), rel=1e-12)

    @pytest.mark.parametrize("seed", range(50))
    def test_spectral_antisymmetry(self, seed):
        """Test flipping u1 negates and reverses the spectrum of J."""
        rng = np.random.default_rng(seed)
        dims = (3, 4, 3) if seed % 2 else (2, 3, 2, 3)
        A, F = random_case(rng, dims)
        flipped = FactorSet(F.weight, (-F.factors[0],) + F.factors[1:])
        w = np.linalg.eigvalsh(build_j(A, F).dense())
        w_flip = np.linalg.eigvalsh(build_j(A, flipped).dense())
        assert np.allclose(w_flip, -w[::-1], atol=1e-9)

    def test_threads_equal_serial(self, rng):
        """Test a threaded build equals the serial build exactly."""
        A, F = random_case(rng, (4, 3, 5, 2, 3))
        serial = build_j(A, F).dense()
        threaded = build_j(A, F, threads=4).dense()
        assert np.array_equal(serial, threaded)

    def test_reuse_intermediates(self, rng):
        """Test shared prefix contractions agree with fresh ones."""
        A, F = random_case(rng, (4, 3, 5, 2, 3))
        fresh = build_j(A, F).dense()
        reused = build_j(A, F, deterministic=False, reuse_intermediates=True).dense()
        pooled = build_j(A, F, threads=3, deterministic=False, reuse_intermediates=True).dense()
        assert np.allclose(reused, fresh, atol=1e-9)
        assert np.allclose(pooled, fresh, atol=1e-9)

    def test_reuse_requires_nondeterministic(self, rng):
        """Test reuse is refused while determinism is on."""
        A, F = random_case(rng, (2, 2, 2))
        with pytest.raises(ConfigurationError):
            build_j(A, F, reuse_intermediates=True)

    def test_degenerate_set(self, rng):
        """Test J cannot be built from a degenerate set."""
        A, F = random_case(rng, (2, 2, 2))
        G = FactorSet(float("nan"), (np.zeros(2),) + F.factors[1:], (0,))
        with pytest.raises(DegenerateFactorError):
            build_j(A, G)

    def test_export(self, rng, tmp_path):
        """Test J exports as an order-2 .dt1 file."""
        A, F = random_case(rng, (2, 3, 2))
        J = build_j(A, F)
        path = tmp_path / "j.dt1"
        J.export(path)
        assert np.array_equal(load_dt1(path).array, J.dense())


class TestKkt:
    """Test cases for KKT residuals and the stopping value."""

    def test_rank_one_exact(self, rng):
        """Test the factors of a rank-one tensor are a KKT point."""
        F = random_factors(rng, (3, 4, 5))
        A = rank_one_tensor(2.0, F.factors)
        report = kkt_report(A, F)
        assert report.weight == pytest.approx(2.0, rel=1e-12)
        assert report.max_residual < 1e-12

    def test_svd_pair(self, rng):
        """Test the top singular pair of a matrix."""
        M = rng.standard_normal((5, 7))
        U, s, Vt = np.linalg.svd(M)
        report = kkt_report(DenseTensor(M), FactorSet(s[0], (U[:, 0], Vt[0])))
        assert report.weight == pytest.approx(s[0], rel=1e-12)
        assert report.max_residual <= 1e-10 * s[0]

    def test_generic_point(self, rng):
        """Test a random point is not stationary."""
        A, F = random_case(rng, (3, 3, 3))
        report = kkt_report(A, F)
        assert report.max_residual > 0.0
        assert report.max_residual == max(report.per_mode_residuals)

    def test_residual_matches_partial_contraction(self, rng):
        """Test per-mode residuals against explicit partial contractions."""
        A, F = random_case(rng, (3, 4, 2))
        report = kkt_report(A, F)
        for n in range(3):
            r = partial_contraction(A, F, n) - report.weight * F.factors[n]
            assert report.per_mode_residuals[n] == pytest.approx(np.linalg.norm(r))

    def test_fixed_point_consistency(self, rng):
        """Test |J(x)x - λx| is the root-mean-square KKT residual."""
        A, F = random_case(rng, (3, 4, 5, 2))
        report = kkt_report(A, F)
        x = stack_factors(F)
        gap = np.linalg.norm(build_j(A, F).matvec(x) - report.weight * x.flat)
        rms = np.sqrt(np.sum(np.square(report.per_mode_residuals)) / 4)
        assert gap == pytest.approx(rms, rel=1e-10)
        assert gap <= np.sqrt(4) * report.max_residual

    def test_stopping_value_hand_example(self):
        """Test the 2x2 reflection with x = e1."""
        J = SymBlockMatrix(block_dims=(1, 1), upper_blocks={(0, 1): np.array([[1.0]])})
        x = StackedVector(np.array([1.0, 0.0]), (1, 1))
        assert scf_stopping_value(J, x, 1.0) == pytest.approx(1.0 / (np.sqrt(2) + 1.0))

    def test_stopping_value_eigenvector(self, rng):
        """Test an exact eigenvector gives (numerically) zero."""
        A, F = random_case(rng, (3, 4, 5))
        J = build_j(A, F)
        w, V = np.linalg.eigh(J.dense())
        x = StackedVector(V[:, -1], (3, 4, 5))
        assert scf_stopping_value(J, x, w[-1]) < 1e-14

    def test_stopping_value_sign_invariant(self, rng):
        """Test x and -x give the same value."""
        A, F = random_case(rng, (3, 4, 5))
        J = build_j(A, F)
        x = stack_factors(random_factors(rng, (3, 4, 5)))
        assert scf_stopping_value(J, x, 0.3) == scf_stopping_value(J, -x, 0.3)

    def test_stopping_value_zero_matrix(self):
        """Test the zero matrix with zero weight."""
        J = SymBlockMatrix(block_dims=(1, 1), upper_blocks={(0, 1): np.zeros((1, 1))})
        x = StackedVector(np.array([1.0, 0.0]), (1, 1))
        assert scf_stopping_value(J, x, 0.0) == 0.0


class TestBlockCoverage:
    """Test cases for block bookkeeping."""

    def test_all_pairs_present(self, rng):
        """Test d(d-1)/2 blocks with the right shapes."""
        dims = (2, 3, 4, 5)
        A, F = random_case(rng, dims)
        J = build_j(A, F)
        assert set(J.upper_blocks) == set(itertools.combinations(range(4), 2))
        for (m, n), block in J.upper_blocks.items():
            assert block.shape == (dims[m], dims[n])
