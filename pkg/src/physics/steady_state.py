from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.physics.model import LocalFields, SceneConfig
from utils.config import physics_logger
from utils.exceptions import CrossCheckFailure, SceneConfigError
from utils.linalg_utils import LinalgUtils


@dataclass(frozen=True)
class SteadyState:
    """
    Steady-state means of the atomic coherence and the cavity field.

    Attributes:
        sigma_mean (complex): <sigma>, the atomic dipole amplitude.
        a_mean (complex): <a>, the cavity field amplitude.
        P_e (float): Excitation probability |<sigma>|^2.
        N_cav (float): Cavity photon number |<a>|^2.
        nu (complex): Generalised cooperativity |g|^2 / (delta_a~ delta_c~).
        omega_atom (complex): Effective atom drive eta - g<a>.
        omega_mode (complex): Effective mode drive E + g*<sigma>.
        delta_a_tilde (complex): delta_a(r) - i gamma.
        delta_c_tilde (complex): delta_c - i kappa.
    """
    sigma_mean: complex
    a_mean: complex
    P_e: float
    N_cav: float
    nu: complex
    omega_atom: complex
    omega_mode: complex
    delta_a_tilde: complex
    delta_c_tilde: complex

    @classmethod
    def from_means(cls, sigma_mean: complex, a_mean: complex, fields: LocalFields, scene: SceneConfig) -> "SteadyState":
        """Fill the derived fields from the two means and the local couplings."""
        params = scene.params
        delta_a_tilde = complex(fields.delta_a, -params.gamma)
        delta_c_tilde = params.delta_c_tilde
        return cls(
            sigma_mean=complex(sigma_mean),
            a_mean=complex(a_mean),
            P_e=abs(sigma_mean) ** 2,
            N_cav=abs(a_mean) ** 2,
            nu=abs(fields.g) ** 2 / (delta_a_tilde * delta_c_tilde),
            omega_atom=fields.eta - fields.g * a_mean,
            omega_mode=params.E + np.conj(fields.g) * sigma_mean,
            delta_a_tilde=delta_a_tilde,
            delta_c_tilde=delta_c_tilde,
        )

    @property
    def S(self) -> np.ndarray:
        """The mean vector (<sigma>, <a>)."""
        return np.array([self.sigma_mean, self.a_mean], dtype=complex)

    @property
    def one_minus_nu_sq(self) -> float:
        """|1 - nu|^2, the fluorescence suppression factor."""
        return abs(1.0 - self.nu) ** 2


@dataclass(frozen=True)
class OscillatorMatrix:
    """
    Linear dynamics of the coupled atom and mode oscillators, dS/dt = M S + i I.

    M = P - iG with P = diag(-i delta_a~, -i delta_c~) and G = [[0, g], [g*, 0]].
    """
    M: np.ndarray
    I_vec: np.ndarray
    S_vec: np.ndarray

    @classmethod
    def build(cls, fields: LocalFields, scene: SceneConfig, S_vec: np.ndarray | None = None) -> "OscillatorMatrix":
        params = scene.params
        P = np.diag([-1j * complex(fields.delta_a, -params.gamma), -1j * params.delta_c_tilde])
        G = np.array([[0.0, fields.g], [np.conj(fields.g), 0.0]], dtype=complex)
        I_vec = np.array([fields.eta, -params.E], dtype=complex)
        S_vec = np.zeros(2, dtype=complex) if S_vec is None else np.asarray(S_vec, dtype=complex)
        return cls(M=P - 1j * G, I_vec=I_vec, S_vec=S_vec)

    @property
    def P(self) -> np.ndarray:
        return np.diag(np.diag(self.M))

    def residual(self) -> float:
        """Relative size of I - iMS, zero in steady state."""
        mismatch = self.I_vec - 1j * self.M @ self.S_vec
        scale = max(np.linalg.norm(self.I_vec), np.linalg.norm(self.M @ self.S_vec), LinalgUtils.RELATIVE_FLOOR)
        return float(np.linalg.norm(mismatch) / scale)


class SteadyStateSolver(LinalgUtils):
    """
    Steady-state means by the closed form and by the 2x2 linear system.

    Both routes take a scene and a position and return the same SteadyState; the
    cross-check compares them.
    """

    CROSS_CHECK_TOLERANCE: float = 1e-10

    @classmethod
    def _require_damping(cls, scene: SceneConfig) -> None:
        if not (scene.params.gamma > 0 and scene.params.kappa > 0):
            physics_logger.error("Steady state requested without damping.")
            raise SceneConfigError("gamma and kappa must be > 0")

    @classmethod
    def steady_closed_form(cls, scene: SceneConfig, r=None) -> SteadyState:
        """
        Closed-form steady state.

        <sigma> = [eta + g E/delta_c~] / [(1 - nu) delta_a~] and
        <a> = -[E + g* eta/delta_a~] / [(1 - nu) delta_c~].

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.

        Returns:
            SteadyState: Means and derived quantities.

        Raises:
            SceneConfigError: If gamma or kappa is not positive.
        """
        cls._require_damping(scene)
        fields = scene.local_fields(r)
        params = scene.params
        da = complex(fields.delta_a, -params.gamma)
        dc = params.delta_c_tilde
        one_minus_nu = 1.0 - abs(fields.g) ** 2 / (da * dc)
        sigma_mean = (fields.eta + fields.g * params.E / dc) / (one_minus_nu * da)
        a_mean = -(params.E + np.conj(fields.g) * fields.eta / da) / (one_minus_nu * dc)
        return SteadyState.from_means(sigma_mean, a_mean, fields, scene)

    @classmethod
    def steady_matrix(cls, scene: SceneConfig, r=None) -> tuple[SteadyState, OscillatorMatrix]:
        """
        Steady state from I - iMS = 0, i.e. S = -i M^-1 I.

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.

        Returns:
            tuple[SteadyState, OscillatorMatrix]: The state and the matrix system holding the solution.

        Raises:
            NumericalFailure: If M is singular.
        """
        cls._require_damping(scene)
        fields = scene.local_fields(r)
        system = OscillatorMatrix.build(fields, scene)
        S_vec = -1j * cls._solve(system.M, system.I_vec, label="oscillator matrix M")
        system = OscillatorMatrix(M=system.M, I_vec=system.I_vec, S_vec=S_vec)
        return SteadyState.from_means(S_vec[0], S_vec[1], fields, scene), system

    @classmethod
    def cross_check(cls, scene: SceneConfig, r=None, tolerance: float | None = None) -> float:
        """
        Compare the closed form with the matrix route.

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.
            tolerance (float | None): Maximum relative deviation; CROSS_CHECK_TOLERANCE by default.

        Returns:
            float: The relative deviation between the two mean vectors.

        Raises:
            CrossCheckFailure: If the deviation exceeds the tolerance.
        """
        tolerance = cls.CROSS_CHECK_TOLERANCE if tolerance is None else tolerance
        closed = cls.steady_closed_form(scene, r)
        matrix, _ = cls.steady_matrix(scene, r)
        deviation = cls._relative_error(closed.S, matrix.S)
        if deviation > tolerance:
            physics_logger.error(f"Steady-state routes disagree: relative deviation {deviation:.3e} > {tolerance:.1e}")
            raise CrossCheckFailure(f"steady state: relative deviation {deviation:.3e} exceeds {tolerance:.1e}")
        physics_logger.info(f"Steady-state cross-check passed (relative deviation {deviation:.3e}).")
        return deviation
