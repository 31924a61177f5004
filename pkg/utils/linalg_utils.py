import logging
import warnings
import numpy as np
import scipy.linalg
from typing import Optional
from utils.config import physics_logger
from utils.exceptions import NumericalFailure

class LinalgUtils:
    """
    A utility class for the dense complex linear algebra shared by every computation route.

    This class provides guarded solves that turn singular or ill-conditioned systems into
    NumericalFailure, relative-error helpers used by the route cross-checks, and
    validation of computed arrays.
    """

    LOGGER: logging.Logger = physics_logger
    RELATIVE_FLOOR: float = 1e-300

    @classmethod
    def _solve(cls, matrix: np.ndarray, rhs: np.ndarray, label: str, overwrite: bool = False) -> np.ndarray:
        """
        Solve matrix @ x = rhs, refusing singular or ill-conditioned systems.

        Args:
            matrix (np.ndarray): Square complex coefficient matrix.
            rhs (np.ndarray): Right-hand side vector or matrix.
            label (str): Name of the system, used in log and error messages.
            overwrite (bool): Allow scipy to overwrite the inputs (large oracle systems).

        Returns:
            np.ndarray: The solution.

        Raises:
            NumericalFailure: If the matrix is singular or numerically ill-conditioned.
        """
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
                return scipy.linalg.solve(matrix, rhs, overwrite_a=overwrite, overwrite_b=overwrite)
        except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning, ValueError) as e:
            cls.LOGGER.error(f"Linear solve for {label} failed: {e}")
            raise NumericalFailure(f"{label}: {e}") from e

    @classmethod
    def _lu_factor(cls, matrix: np.ndarray, label: str) -> tuple:
        """
        LU-factorise a square matrix for repeated solves.

        Args:
            matrix (np.ndarray): Square complex matrix; it is overwritten.
            label (str): Name of the system, used in log and error messages.

        Returns:
            tuple: The (lu, piv) pair accepted by scipy.linalg.lu_solve.

        Raises:
            NumericalFailure: If the factorisation detects an exactly singular or
            ill-conditioned matrix. The message carries the reciprocal condition estimate.
        """
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
                factors = scipy.linalg.lu_factor(matrix, overwrite_a=True)
        except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning, ValueError) as e:
            cls.LOGGER.error(f"LU factorisation for {label} failed: {e}")
            raise NumericalFailure(f"{label}: {e}") from e

        lu = factors[0]
        diagonal = np.abs(np.diag(lu))
        rcond = diagonal.min() / max(diagonal.max(), cls.RELATIVE_FLOOR)
        if not np.isfinite(rcond) or rcond < np.finfo(float).eps:
            cls.LOGGER.error(f"LU factorisation for {label} is ill-conditioned (pivot ratio {rcond:.3e})")
            raise NumericalFailure(f"{label}: ill-conditioned system, pivot ratio estimate {rcond:.3e}")
        return factors

    @classmethod
    def _lu_solve(cls, factors: tuple, rhs: np.ndarray) -> np.ndarray:
        """Solve with a factorisation returned by `_lu_factor`."""
        return scipy.linalg.lu_solve(factors, rhs)

    @classmethod
    def _relative_error(cls, reference: np.ndarray | complex, candidate: np.ndarray | complex) -> float:
        """
        Relative deviation |candidate - reference| / max(|reference|, |candidate|).

        Args:
            reference (np.ndarray | complex): Reference value(s).
            candidate (np.ndarray | complex): Value(s) to compare.

        Returns:
            float: The relative deviation; 0 when both are exactly zero.
        """
        reference = np.asarray(reference, dtype=complex)
        candidate = np.asarray(candidate, dtype=complex)
        scale = max(np.linalg.norm(reference), np.linalg.norm(candidate))
        if scale < cls.RELATIVE_FLOOR:
            return 0.0
        return float(np.linalg.norm(candidate - reference) / scale)

    @classmethod
    def _validate_finite(cls, values: np.ndarray | complex, label: str) -> Optional[np.ndarray]:
        """
        Validate that a computed quantity contains only finite numbers.

        Args:
            values (np.ndarray | complex): The computed quantity.
            label (str): Name of the quantity for messages.

        Returns:
            Optional[np.ndarray]: The values as an array when finite.

        Raises:
            NumericalFailure: If any entry is NaN or infinite.
        """
        array = np.asarray(values)
        if not np.all(np.isfinite(array)):
            cls.LOGGER.error(f"Non-finite values produced for {label}.")
            raise NumericalFailure(f"{label}: non-finite result")
        return array
