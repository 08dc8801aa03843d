"""
Test tensor generators.
"""

import logging

import numpy as np
import pytest
from rank_one_scf.config import ExperimentSpec, Generator
from rank_one_scf.exceptions import ConfigurationError, TensorShapeError
from rank_one_scf.generators import (
    gen_arcsin,
    gen_exp,
    gen_gaussian,
    gen_tan,
    generate,
    odeco_tensor,
    random_rank_one,
)
from rank_one_scf.tensor_core import frobenius_norm, save_dt1


class TestClosedForms:
    """Test cases for the closed-form benchmark families."""

    def test_exp_first_entry(self):
        """Test EXP at (1, 1, 1) is (1 - 2 + 3) / e."""
        A = gen_exp((3, 3, 3))
        assert A[0, 0, 0] == pytest.approx(2 / np.e, rel=1e-14)

    def test_exp_entry(self):
        """Test an interior EXP entry against the formula."""
        A = gen_exp((4, 5, 6))
        expected = np.exp(-2) - 2 * np.exp(-5) + 3 * np.exp(-6)
        assert A[1, 4, 5] == pytest.approx(expected, rel=1e-14)

    def test_tan_first_entry(self):
        """Test TAN at (1, ..., 1) for d = 5 is tan(47/60)."""
        A = gen_tan((2, 2, 2, 2, 2))
        assert A[0, 0, 0, 0, 0] == pytest.approx(np.tan(47 / 60), rel=1e-14)

    def test_arcsin_entries(self):
        """Test the support mask and the product grouping."""
        A = gen_arcsin((4, 4, 4, 4))
        assert A[0, 0, 0, 0] == 0.0
        assert A[0, 1, 2, 3] == pytest.approx(0.0, abs=1e-15)
        assert A[1, 1, 2, 3] == pytest.approx(2 * np.pi / 3, rel=1e-14)

    def test_arcsin_exponent_grouping_is_zero(self):
        """Test the exponent grouping cancels to zero for d = 4."""
        A = gen_arcsin((20, 20, 20, 20), grouping="exponent")
        assert frobenius_norm(A) == pytest.approx(0.0, abs=1e-12)

    def test_arcsin_empty_support(self, caplog):
        """Test a mode shorter than its index gives the zero tensor with a warning."""
        with caplog.at_level(logging.WARNING):
            A = gen_arcsin((3, 3, 3, 3))
        assert frobenius_norm(A) == 0.0
        assert "tensor is zero" in caplog.text

    def test_arcsin_unknown_grouping(self):
        """Test unknown groupings are rejected."""
        with pytest.raises(ConfigurationError):
            gen_arcsin((4, 4, 4, 4), grouping="sum")

    def test_order_one_rejected(self):
        """Test order-1 shapes are rejected."""
        with pytest.raises(TensorShapeError):
            gen_exp((5,))


class TestRandomTensors:
    """Test cases for seeded random generators."""

    def test_gaussian_statistics(self):
        """Test mean and variance of the Gaussian generator."""
        data = gen_gaussian((30, 30, 30), seed=1).array
        assert abs(data.mean()) < 0.05
        assert data.std() == pytest.approx(1.0, abs=0.05)

    def test_gaussian_norm_concentration(self):
        """Test |A|_F^2 of a 10x10x10 Gaussian tensor is near 1000."""
        norm_sq = frobenius_norm(gen_gaussian((10, 10, 10), seed=4)) ** 2
        assert abs(norm_sq - 1000.0) <= 4 * np.sqrt(2000.0)

    def test_gaussian_reproducible(self):
        """Test the same seed reproduces the tensor."""
        assert np.array_equal(gen_gaussian((3, 4), 9).array, gen_gaussian((3, 4), 9).array)
        assert not np.array_equal(gen_gaussian((3, 4), 9).array, gen_gaussian((3, 4), 10).array)

    def test_random_rank_one_norm(self):
        """Test the norm equals the weight."""
        assert frobenius_norm(random_rank_one((3, 4, 5), 2, weight=4.0)) == pytest.approx(4.0)

    def test_odeco_orthogonality(self):
        """Test odeco factors are orthonormal across terms in every mode."""
        A, terms = odeco_tensor([3.0, 2.0, 1.0], (4, 5, 6), seed=3)
        for n in range(3):
            Q = np.column_stack([t.factors[n] for t in terms])
            assert np.allclose(Q.T @ Q, np.eye(3), atol=1e-12)
        assert frobenius_norm(A) == pytest.approx(np.sqrt(14.0))

    def test_odeco_too_many_terms(self):
        """Test more terms than the shortest mode is rejected."""
        with pytest.raises(TensorShapeError):
            odeco_tensor([1.0, 1.0, 1.0], (2, 5, 5))


class TestGenerate:
    """Test cases for generate."""

    @pytest.mark.parametrize("generator", ["exp", "tan", "gaussian", "rank1"])
    def test_default_dims(self, generator):
        """Test specs without dims use the generator defaults."""
        spec = ExperimentSpec(generator=generator)
        assert generate(spec).dims == spec.dims

    def test_from_file(self, tmp_path):
        """Test the file generator reads a .dt1 tensor."""
        path = tmp_path / "a.dt1"
        A = gen_exp((2, 3, 4))
        save_dt1(A, path)
        spec = ExperimentSpec(generator=Generator.FILE, input_path=path)
        assert np.array_equal(generate(spec).array, A.array)
