import numpy as np
import pytest

from utils.exceptions import NumericalFailure
from utils.linalg_utils import LinalgUtils


class TestLinalgUtils:
    def test_solve_success(self):
        """A well-conditioned complex system is solved exactly."""
        matrix = np.array([[2.0 - 1.0j, 1.0], [0.5j, -3.0]])
        x = np.array([1.0 + 2.0j, -0.5j])
        np.testing.assert_allclose(LinalgUtils._solve(matrix, matrix @ x, "test system"), x)

    def test_solve_singular(self):
        """A singular matrix raises NumericalFailure naming the system."""
        matrix = np.array([[1.0, 2.0], [2.0, 4.0]], dtype=complex)
        with pytest.raises(NumericalFailure, match="test system"):
            LinalgUtils._solve(matrix, np.ones(2, dtype=complex), "test system")

    def test_lu_factor_and_solve(self):
        rng = np.random.default_rng(3)
        matrix = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)) + 5.0 * np.eye(5)
        rhs = rng.normal(size=5) + 0j
        factors = LinalgUtils._lu_factor(matrix.copy(), "random system")
        np.testing.assert_allclose(matrix @ LinalgUtils._lu_solve(factors, rhs), rhs, atol=1e-12)

    def test_lu_factor_ill_conditioned(self):
        """Pivots spanning more than machine precision are refused."""
        matrix = np.diag([1.0, 1e-20]).astype(complex)
        with pytest.raises(NumericalFailure, match="pivot ratio"):
            LinalgUtils._lu_factor(matrix, "nearly singular")

    @pytest.mark.parametrize(
        "reference, candidate, expected",
        [
            (1.0, 1.0, 0.0),
            (0.0, 0.0, 0.0),
            (2.0, 1.0, 0.5),
            (1.0j, -1.0j, 2.0),
            (np.array([3.0, 4.0]), np.array([3.0, 4.5]), 0.5 / np.linalg.norm([3.0, 4.5])),
        ],
    )
    def test_relative_error(self, reference, candidate, expected):
        assert LinalgUtils._relative_error(reference, candidate) == pytest.approx(expected)

    @pytest.mark.parametrize("values", [np.array([1.0, np.nan]), complex(np.inf, 0.0), np.array([[0.0, -np.inf]])])
    def test_validate_finite_rejects(self, values):
        with pytest.raises(NumericalFailure, match="gradient"):
            LinalgUtils._validate_finite(values, "gradient")

    def test_validate_finite_passes_array_through(self):
        values = np.array([1.0 + 1.0j, -2.0])
        np.testing.assert_array_equal(LinalgUtils._validate_finite(values, "means"), values)
