"""
Test greedy rank-R deflation.
"""

from unittest.mock import patch

import numpy as np
import pytest
from rank_one_scf import greedy_cp
from rank_one_scf.config import Algorithm, SolveOptions
from rank_one_scf.exceptions import ConfigurationError, GreedyAbortError, SolverFailureError
from rank_one_scf.generators import gen_gaussian, odeco_tensor, random_rank_one
from rank_one_scf.greedy_cp import GreedyReport, greedy_rank_r
from rank_one_scf.tensor_core import frobenius_norm

TIGHT = SolveOptions(tol=1e-10, max_iters=5000)


class TestGreedyRankR:
    """Test cases for greedy_rank_r."""

    def test_rank_one_input(self):
        """Test a single term removes an exact rank-one tensor."""
        A = random_rank_one((4, 5, 6), seed=3, weight=2.5)
        report = greedy_rank_r(A, 1, opts=TIGHT)

        assert report.rank == 1
        assert report.terms[0].weight == pytest.approx(2.5, rel=1e-10)
        assert report.residual_ratios[0] <= 1e-10

    def test_odeco_terms_in_order(self):
        """Test deflation of an orthogonal two-term tensor with weights 3 and 1."""
        A, _ = odeco_tensor([3.0, 1.0], (5, 5, 5), seed=1)
        report = greedy_rank_r(A, 2, opts=TIGHT, starts=5)

        assert report.terms[0].weight == pytest.approx(3.0, rel=1e-8)
        assert report.terms[1].weight == pytest.approx(1.0, rel=1e-8)
        assert report.residual_ratios[0] == pytest.approx(1 / np.sqrt(10), abs=1e-8)
        assert report.residual_ratios[1] <= 1e-8

    def test_pythagorean_identity(self):
        """Test each deflation removes exactly λ² from the squared residual."""
        A = gen_gaussian((6, 5, 4), seed=2)
        report = greedy_rank_r(A, 3, opts=TIGHT)

        norms = report.residual_norms
        for r, term in enumerate(report.terms):
            expected = norms[r] ** 2 - term.weight ** 2
            assert norms[r + 1] ** 2 == pytest.approx(expected, rel=1e-7, abs=1e-10)

    def test_ratios_non_increasing(self):
        """Test the relative residual never grows."""
        A = gen_gaussian((5, 5, 5), seed=7)
        report = greedy_rank_r(A, 4, Algorithm.IHOSCF, TIGHT)

        ratios = [1.0] + report.residual_ratios
        assert all(b <= a + 1e-12 for a, b in zip(ratios, ratios[1:]))
        assert report.residual_norms[0] == frobenius_norm(A)

    def test_reconstruct(self):
        """Test the sum of the terms matches A minus the final residual."""
        A = gen_gaussian((4, 4, 4), seed=5)
        report = greedy_rank_r(A, 2, opts=TIGHT)
        approx = report.reconstruct()

        assert frobenius_norm(A - approx) == pytest.approx(report.residual_norms[-1], rel=1e-10)

    def test_term_seeds(self):
        """Test term r runs with seed base + r."""
        A = gen_gaussian((4, 4, 4), seed=5)
        report = greedy_rank_r(A, 3, opts=SolveOptions(seed=20))

        assert [r.seed for r in report.reports] == [20, 21, 22]

    def test_invalid_rank(self):
        """Test R and starts must be positive."""
        A = gen_gaussian((3, 3, 3))
        with pytest.raises(ConfigurationError):
            greedy_rank_r(A, 0)
        with pytest.raises(ConfigurationError):
            greedy_rank_r(A, 2, starts=0)

    def test_empty_reconstruct(self):
        """Test an empty report cannot be reconstructed."""
        with pytest.raises(ConfigurationError):
            GreedyReport().reconstruct()

    def test_abort_keeps_partial_terms(self):
        """Test an inner failure aborts with the terms found so far."""
        A = gen_gaussian((4, 4, 4), seed=8)
        real_solve = greedy_cp.solve
        calls = {"n": 0}

        def fail_second(*args, **kwargs):
            calls["n"] += 1
            if calls["n"] == 2:
                raise SolverFailureError("degenerate factors after restart")
            return real_solve(*args, **kwargs)

        with patch.object(greedy_cp, "solve", side_effect=fail_second):
            with pytest.raises(GreedyAbortError) as exc_info:
                greedy_rank_r(A, 3)

        partial = exc_info.value.details["report"]
        assert partial.rank == 1
        assert isinstance(exc_info.value.details["cause"], SolverFailureError)
