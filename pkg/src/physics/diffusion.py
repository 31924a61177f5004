from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.physics.model import SceneConfig
from src.physics.steady_state import OscillatorMatrix, SteadyState, SteadyStateSolver
from utils.config import physics_logger
from utils.exceptions import CrossCheckFailure, SceneConfigError
from utils.linalg_utils import LinalgUtils


@dataclass(frozen=True)
class ValidityFlags:
    """Harmonic-limit validity: P_e < p_max and 2 P_e < (gamma/|delta_a|)^(2/3)."""
    P_e_small: bool
    harmonic_ok: bool

    @property
    def ok(self) -> bool:
        return self.P_e_small and self.harmonic_ok


@dataclass(frozen=True)
class MeanGradients:
    """Complex 3-vector gradients of <sigma> and <a>."""
    grad_sigma: np.ndarray
    grad_a: np.ndarray

    def along(self, axis: np.ndarray) -> tuple[complex, complex]:
        return complex(axis @ self.grad_sigma), complex(axis @ self.grad_a)


@dataclass(frozen=True)
class DiffusionResult:
    """
    Momentum diffusion at one position, along one axis.

    Every `two_D_*` field is a momentum-variance rate 2D in units of (hbar k)^2 gamma.
    `tensor` is the symmetric force-fluctuation tensor 2D_ij (atom plus mode); its
    diagonal reproduces two_D_atom + two_D_mode along x, y and z. `spont_tensor`
    distributes two_D_spont over directions with the configured angular second moment.
    """
    axis: np.ndarray
    two_D_spont: float
    two_D_atom: float
    two_D_mode: float
    two_D_total: float
    tensor: np.ndarray
    spont_tensor: np.ndarray
    heating_rate: Optional[float]
    validity: ValidityFlags
    steady: SteadyState

    @property
    def two_D_force(self) -> float:
        """Force-fluctuation part, two_D_atom + two_D_mode."""
        return self.two_D_atom + self.two_D_mode

    @property
    def total_tensor(self) -> np.ndarray:
        return self.tensor + self.spont_tensor


@dataclass(frozen=True)
class MeanForce:
    """
    Mean force and its mean-field decomposition.

    force = force_atom + force_mode + force_coupling, where force_coupling = -grad U with
    the mean interaction energy U = -hbar g<a><sigma>* + c.c.
    """
    force: np.ndarray
    force_atom: np.ndarray
    force_mode: np.ndarray
    force_coupling: np.ndarray
    removal_rate: float


class DiffusionCalculator(LinalgUtils):
    """
    Momentum diffusion coefficients by the mean-field formula, the compact matrix form,
    finite-difference gradients and the free-space formula.
    """

    FD_STEP: float = 1e-6
    SPONT_ANGULAR_MOMENT: np.ndarray = np.eye(3) / 3.0
    CROSS_CHECK_TOLERANCE: float = 1e-10

    @classmethod
    def validity_flags(cls, scene: SceneConfig, steady: SteadyState) -> ValidityFlags:
        """
        Flag the harmonic-limit inequalities. Violations are logged, never raised.

        Args:
            scene (SceneConfig): Scene holding gamma and p_max.
            steady (SteadyState): Steady state holding P_e and the local detuning.

        Returns:
            ValidityFlags: Both inequalities.
        """
        delta_a = abs(steady.delta_a_tilde.real)
        bound = math.inf if delta_a == 0.0 else (scene.params.gamma / delta_a) ** (2.0 / 3.0)
        flags = ValidityFlags(
            P_e_small=steady.P_e < scene.p_max,
            harmonic_ok=2.0 * steady.P_e < bound,
        )
        if not flags.ok:
            physics_logger.warning(
                f"Outside the harmonic regime: P_e={steady.P_e:.4g}, p_max={scene.p_max}, "
                f"2P_e={2.0 * steady.P_e:.4g} vs (gamma/|delta_a|)^(2/3)={bound:.4g}"
            )
        return flags

    @classmethod
    def gradient_analytic(cls, scene: SceneConfig, r=None) -> tuple[SteadyState, MeanGradients]:
        """
        Closed-form steady state and its exact gradients by the chain rule over
        grad g, grad eta, grad delta_a and grad nu.

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.

        Returns:
            tuple[SteadyState, MeanGradients]: The state and the gradients of its means.
        """
        steady = SteadyStateSolver.steady_closed_form(scene, r)
        fields = scene.local_fields(r)
        E = scene.params.E
        da, dc = steady.delta_a_tilde, steady.delta_c_tilde
        g, eta = fields.g, fields.eta
        grad_g, grad_eta = fields.grad_g, fields.grad_eta
        grad_da = fields.grad_delta_a.astype(complex)

        grad_g_sq = 2.0 * np.real(np.conj(g) * grad_g)
        grad_nu = grad_g_sq / (da * dc) - steady.nu * grad_da / da
        s = 1.0 - steady.nu

        numerator_sigma = eta + g * E / dc
        grad_numerator_sigma = grad_eta + grad_g * E / dc
        denominator_sigma = s * da
        grad_denominator_sigma = -grad_nu * da + s * grad_da
        grad_sigma = (grad_numerator_sigma - numerator_sigma * grad_denominator_sigma / denominator_sigma) / denominator_sigma

        numerator_a = -(E + np.conj(g) * eta / da)
        grad_numerator_a = -(np.conj(grad_g) * eta / da + np.conj(g) * grad_eta / da - np.conj(g) * eta * grad_da / da**2)
        denominator_a = s * dc
        grad_denominator_a = -grad_nu * dc
        grad_a = (grad_numerator_a - numerator_a * grad_denominator_a / denominator_a) / denominator_a

        return steady, MeanGradients(grad_sigma=grad_sigma, grad_a=grad_a)

    @classmethod
    def gradient_fd(cls, scene: SceneConfig, r=None, step: float | None = None, richardson: bool = False) -> MeanGradients:
        """
        Central finite-difference gradients of the closed-form means.

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.
            step (float | None): Step in optical-phase units; FD_STEP by default.
            richardson (bool): Combine steps h and h/2 to cancel the O(h^2) error.

        Returns:
            MeanGradients: Numerical gradients.

        Raises:
            SceneConfigError: If step is not positive.
        """
        step = cls.FD_STEP if step is None else step
        if not step > 0:
            raise SceneConfigError(f"finite-difference step must be > 0, got {step!r}")
        r = scene.resolve_position(r)

        def central(h: float) -> tuple[np.ndarray, np.ndarray]:
            grad_sigma = np.zeros(3, dtype=complex)
            grad_a = np.zeros(3, dtype=complex)
            for i in range(3):
                offset = np.zeros(3)
                offset[i] = h
                plus = SteadyStateSolver.steady_closed_form(scene, r + offset)
                minus = SteadyStateSolver.steady_closed_form(scene, r - offset)
                grad_sigma[i] = (plus.sigma_mean - minus.sigma_mean) / (2.0 * h)
                grad_a[i] = (plus.a_mean - minus.a_mean) / (2.0 * h)
            return grad_sigma, grad_a

        grad_sigma, grad_a = central(step)
        if richardson:
            fine_sigma, fine_a = central(step / 2.0)
            grad_sigma = (4.0 * fine_sigma - grad_sigma) / 3.0
            grad_a = (4.0 * fine_a - grad_a) / 3.0
        return MeanGradients(grad_sigma=grad_sigma, grad_a=grad_a)

    @classmethod
    def from_gradients(
        cls, scene: SceneConfig, steady: SteadyState, gradients: MeanGradients, axis=None,
        force_part: float | None = None,
    ) -> DiffusionResult:
        """
        Assemble a DiffusionResult from a steady state and the gradients of its means.

        Args:
            scene (SceneConfig): The scene.
            steady (SteadyState): Steady state at the evaluation point.
            gradients (MeanGradients): Gradients of <sigma> and <a>.
            axis: Unit axis; the scene default when omitted.
            force_part (float | None): Externally computed two_D_atom + two_D_mode
                (compact matrix form); the sum of the two terms when omitted.

        Returns:
            DiffusionResult: All components, tensors and flags.
        """
        params = scene.params
        axis = scene.resolve_axis(axis)
        hbar_sq = params.hbar**2
        d_sigma, d_a = gradients.along(axis)
        two_D_spont = (params.hbar * params.k) ** 2 * 2.0 * params.gamma * steady.P_e
        two_D_atom = hbar_sq * abs(d_sigma) ** 2 * 2.0 * params.gamma
        two_D_mode = hbar_sq * abs(d_a) ** 2 * 2.0 * params.kappa
        force = two_D_atom + two_D_mode if force_part is None else force_part
        two_D_total = two_D_spont + force

        tensor = hbar_sq * (
            2.0 * params.gamma * np.real(np.outer(np.conj(gradients.grad_sigma), gradients.grad_sigma))
            + 2.0 * params.kappa * np.real(np.outer(np.conj(gradients.grad_a), gradients.grad_a))
        )
        tensor = 0.5 * (tensor + tensor.T)
        spont_tensor = two_D_spont * cls.SPONT_ANGULAR_MOMENT

        heating_rate = None if params.mass is None else two_D_total / (2.0 * params.mass)
        return DiffusionResult(
            axis=axis,
            two_D_spont=float(two_D_spont),
            two_D_atom=float(two_D_atom),
            two_D_mode=float(two_D_mode),
            two_D_total=float(two_D_total),
            tensor=tensor,
            spont_tensor=spont_tensor,
            heating_rate=heating_rate,
            validity=cls.validity_flags(scene, steady),
            steady=steady,
        )

    @classmethod
    def diffusion_free_space(cls, scene: SceneConfig, r=None, axis=None) -> DiffusionResult:
        """
        Free-space diffusion, 2D = (hbar k)^2 2 gamma P_e + |hbar grad <sigma>|^2 2 gamma.

        The cavity is ignored: <sigma> = eta/delta_a~ and the mode term is zero.

        Args:
            scene (SceneConfig): The scene; g and E are not used.
            r: Position; the scene default when omitted.
            axis: Unit axis; the scene default when omitted.

        Returns:
            DiffusionResult: Result with two_D_mode = 0.
        """
        fields = scene.local_fields(r)
        free_scene = scene.with_params(g0=0.0, E=0.0)
        da = complex(fields.delta_a, -scene.params.gamma)
        sigma_mean = fields.eta / da
        grad_sigma = fields.grad_eta / da - fields.eta * fields.grad_delta_a / da**2
        steady = SteadyState.from_means(sigma_mean, 0.0, free_scene.local_fields(r), free_scene)
        gradients = MeanGradients(grad_sigma=grad_sigma, grad_a=np.zeros(3, dtype=complex))
        return cls.from_gradients(free_scene, steady, gradients, axis)

    @classmethod
    def diffusion_mean_field(cls, scene: SceneConfig, r=None, axis=None) -> DiffusionResult:
        """
        Cavity diffusion 2D = (hbar k)^2 2 gamma P_e + |hbar grad <sigma>|^2 2 gamma + |hbar grad <a>|^2 2 kappa,
        with analytic gradients of the closed-form means.

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.
            axis: Unit axis; the scene default when omitted.

        Returns:
            DiffusionResult: All components.
        """
        steady, gradients = cls.gradient_analytic(scene, r)
        return cls.from_gradients(scene, steady, gradients, axis)

    @classmethod
    def u_vector(cls, system: OscillatorMatrix, scene: SceneConfig, r=None, direction=None) -> np.ndarray:
        """
        Force-fluctuation coordinates u = hbar [grad I - i (grad M) S] along a direction.

        Args:
            system (OscillatorMatrix): Matrix system holding the steady-state S.
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.
            direction: Unit direction of the directional derivative.

        Returns:
            np.ndarray: The complex 2-vector u.
        """
        fields = scene.local_fields(r)
        n = scene.resolve_axis(direction)
        d_eta = complex(n @ fields.grad_eta)
        d_g = complex(n @ fields.grad_g)
        d_delta_a = float(n @ fields.grad_delta_a)
        grad_I = np.array([d_eta, 0.0], dtype=complex)
        grad_M = np.array([[-1j * d_delta_a, -1j * d_g], [-1j * np.conj(d_g), 0.0]], dtype=complex)
        return scene.params.hbar * (grad_I - 1j * grad_M @ system.S_vec)

    @classmethod
    def diffusion_matrix_form(cls, scene: SceneConfig, r=None, axis=None) -> DiffusionResult:
        """
        Compact matrix form 2D = (hbar k)^2 2 gamma P_e - u^dag (M^-1 + M^-1^dag) u.

        The gradients of the means follow from u = i hbar M grad S, so the atom and mode
        terms are also reported; their sum equals the compact force term.

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.
            axis: Unit axis; the scene default when omitted.

        Returns:
            DiffusionResult: All components.

        Raises:
            NumericalFailure: If M is singular.
        """
        axis = scene.resolve_axis(axis)
        steady, system = SteadyStateSolver.steady_matrix(scene, r)
        hbar = scene.params.hbar
        M_inv = cls._solve(system.M, np.eye(2, dtype=complex), label="oscillator matrix M")

        grad_S = np.zeros((2, 3), dtype=complex)
        for i in range(3):
            u = cls.u_vector(system, scene, r, np.eye(3)[i])
            grad_S[:, i] = -1j * M_inv @ u / hbar
        u_axis = cls.u_vector(system, scene, r, axis)
        force_part = -np.vdot(u_axis, (M_inv + M_inv.conj().T) @ u_axis)
        force_part = cls._validate_finite(force_part, "compact diffusion form")

        gradients = MeanGradients(grad_sigma=grad_S[0], grad_a=grad_S[1])
        return cls.from_gradients(scene, steady, gradients, axis, force_part=float(np.real(force_part)))

    @classmethod
    def diffusion_finite_difference(cls, scene: SceneConfig, r=None, axis=None, step: float | None = None,
                                    richardson: bool = False) -> DiffusionResult:
        """Mean-field diffusion evaluated with finite-difference gradients."""
        steady = SteadyStateSolver.steady_closed_form(scene, r)
        gradients = cls.gradient_fd(scene, r, step=step, richardson=richardson)
        return cls.from_gradients(scene, steady, gradients, axis)

    @classmethod
    def mean_force(cls, scene: SceneConfig, r=None) -> MeanForce:
        """
        Mean force F = -<grad H_JC> with factorised means, and its decomposition.

        F = 2Re[(grad eta) <sigma>*] - 2Re[(grad g) <a><sigma>*] - (grad delta_a) P_e.
        F_atom = 2Re[(grad Omega_atom) <sigma>*] - (grad delta_a) P_e,
        F_mode = -2Re[(grad Omega_mode) <a>*], F_coupling = -grad U.

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.

        Returns:
            MeanForce: Real 3-vectors and the photon removal rate 2 gamma P_e + 2 kappa N_cav.
        """
        steady, gradients = cls.gradient_analytic(scene, r)
        fields = scene.local_fields(r)
        hbar = scene.params.hbar
        sigma, a = steady.sigma_mean, steady.a_mean
        g, grad_g = fields.g, fields.grad_g
        grad_sigma, grad_a = gradients.grad_sigma, gradients.grad_a

        force = (
            2.0 * np.real(fields.grad_eta * np.conj(sigma))
            - 2.0 * np.real(grad_g * a * np.conj(sigma))
            - fields.grad_delta_a * steady.P_e
        )
        grad_omega_atom = fields.grad_eta - grad_g * a - g * grad_a
        grad_omega_mode = np.conj(grad_g) * sigma + np.conj(g) * grad_sigma
        force_atom = 2.0 * np.real(grad_omega_atom * np.conj(sigma)) - fields.grad_delta_a * steady.P_e
        force_mode = -2.0 * np.real(grad_omega_mode * np.conj(a))
        force_coupling = 2.0 * np.real(grad_g * a * np.conj(sigma) + g * grad_a * np.conj(sigma) + g * a * np.conj(grad_sigma))

        removal_rate = 2.0 * scene.params.gamma * steady.P_e + 2.0 * scene.params.kappa * steady.N_cav
        return MeanForce(
            force=hbar * force,
            force_atom=hbar * force_atom,
            force_mode=hbar * force_mode,
            force_coupling=hbar * force_coupling,
            removal_rate=float(removal_rate),
        )

    @classmethod
    def cross_check(cls, scene: SceneConfig, r=None, axis=None, tolerance: float | None = None) -> float:
        """
        Compare the mean-field formula with the compact matrix form.

        Returns:
            float: Relative deviation of the total diffusion.

        Raises:
            CrossCheckFailure: If the deviation exceeds the tolerance.
        """
        tolerance = cls.CROSS_CHECK_TOLERANCE if tolerance is None else tolerance
        mean_field = cls.diffusion_mean_field(scene, r, axis)
        matrix = cls.diffusion_matrix_form(scene, r, axis)
        deviation = cls._relative_error(mean_field.two_D_total, matrix.two_D_total)
        if deviation > tolerance:
            physics_logger.error(f"Diffusion routes disagree: relative deviation {deviation:.3e} > {tolerance:.1e}")
            raise CrossCheckFailure(f"diffusion: relative deviation {deviation:.3e} exceeds {tolerance:.1e}")
        return deviation
