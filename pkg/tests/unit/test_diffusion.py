import cmath
import math

import numpy as np
import pytest

from scene_factory import (
    CAVITY_AXIS,
    SIDE_AXIS,
    cavity_node_scene,
    dark_state_scene,
    fig2_scene,
    fig3_scene,
    free_node_scene,
    free_running_scene,
    random_scene,
)
from src.physics.diffusion import DiffusionCalculator, MeanGradients
from src.physics.model import FieldProfile, SceneConfig, SystemParams
from src.physics.steady_state import SteadyStateSolver
from utils.exceptions import CrossCheckFailure, SceneConfigError


def relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


class TestFreeSpace:
    def test_running_wave_example(self):
        """eta = 0.1 on resonance: P_e = 0.01 and both terms equal 0.02."""
        result = DiffusionCalculator.diffusion_free_space(free_running_scene())
        assert result.steady.P_e == pytest.approx(0.01, rel=1e-12)
        assert result.two_D_atom == pytest.approx(0.02, rel=1e-12)
        assert result.two_D_spont == pytest.approx(0.02, rel=1e-12)
        assert result.two_D_mode == 0.0

    @pytest.mark.parametrize("delta_a, k_L", [(0.0, 1.0), (3.0, 0.7), (-12.0, 1.3)])
    def test_running_wave_identity(self, delta_a, k_L):
        """two_D_atom = (hbar k_L)^2 2 gamma P_e for a running wave."""
        result = DiffusionCalculator.diffusion_mean_field(free_running_scene(0.2 - 0.1j, delta_a, k_L))
        assert result.two_D_atom == pytest.approx(k_L**2 * 2.0 * result.steady.P_e, rel=1e-12)

    def test_node_has_finite_diffusion_without_excitation(self):
        result = DiffusionCalculator.diffusion_free_space(free_node_scene(eta0=0.1, delta_a=0.0))
        assert result.steady.P_e < 1e-30
        assert result.two_D_spont < 1e-30
        assert result.two_D_atom == pytest.approx(0.01 * 2.0, rel=1e-12)

    def test_no_drive_gives_zero(self):
        result = DiffusionCalculator.diffusion_free_space(free_running_scene(eta0=0.0))
        assert result.two_D_total == 0.0

    def test_uncoupled_scene_reduces_to_free_space(self):
        scene = free_running_scene(0.15, delta_a=2.0)
        cavity = DiffusionCalculator.diffusion_mean_field(scene)
        free = DiffusionCalculator.diffusion_free_space(scene)
        assert cavity.two_D_total == pytest.approx(free.two_D_total, rel=1e-14)
        assert cavity.two_D_mode == 0.0


class TestMeanField:
    def test_cavity_node_kicks_without_photons(self):
        """At g = 0 the vacuum cavity still diffuses the atom along its axis."""
        result = DiffusionCalculator.diffusion_mean_field(cavity_node_scene(eta0=0.1, g0=2.0, delta_a=1.0, delta_c=0.5))
        expected = 2.0 * 4.0 * 0.01 / (1.25 * 2.0)
        assert result.steady.N_cav < 1e-30
        assert result.two_D_mode == pytest.approx(expected, rel=1e-12)

    def test_dark_state_diffusion_is_finite(self):
        result = DiffusionCalculator.diffusion_mean_field(dark_state_scene(), axis=SIDE_AXIS)
        assert result.steady.P_e < 1e-30
        assert result.two_D_spont < 1e-30
        assert result.two_D_total > 1e-4

    def test_positivity_on_random_scenes(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            result = DiffusionCalculator.diffusion_mean_field(random_scene(rng))
            assert result.two_D_spont >= 0.0
            assert result.two_D_atom >= 0.0
            assert result.two_D_mode >= 0.0
            assert result.two_D_total == pytest.approx(result.two_D_spont + result.two_D_atom + result.two_D_mode)

    def test_total_ignores_relative_phase_of_gradients(self):
        """No cross term between the atom and mode gradients enters the total."""
        scene = fig2_scene(12.0, axis=(1.0, 1.0, 0.0), position=(0.4, 0.0, 0.0))
        steady, gradients = DiffusionCalculator.gradient_analytic(scene)
        reference = DiffusionCalculator.from_gradients(scene, steady, gradients).two_D_total
        for theta in np.linspace(0.0, 2.0 * math.pi, 9):
            rotated = MeanGradients(gradients.grad_sigma, cmath.exp(1j * theta) * gradients.grad_a)
            assert DiffusionCalculator.from_gradients(scene, steady, rotated).two_D_total == pytest.approx(reference, rel=1e-14)

    def test_atom_cavity_exchange_symmetry(self):
        """(delta_a, gamma, -eta, g) <-> (delta_c, kappa, E, g*) swaps <sigma> with <a> and D_atom with D_mode."""
        g_shape = FieldProfile.standing(1.0, (1.0, 0.0, 0.0))
        constant = FieldProfile.constant(1.0)
        eta, E, g0 = 0.2 + 0.1j, 0.3 - 0.05j, 2.0 + 1.0j
        original = SceneConfig.from_params(
            SystemParams(gamma=0.8, kappa=1.4, delta_a0=1.3, delta_c=-0.7, g0=g0, eta0=eta, E=E),
            g_shape=g_shape, eta_shape=constant, position=(0.6, 0.0, 0.0), axis=CAVITY_AXIS,
        )
        swapped = SceneConfig.from_params(
            SystemParams(gamma=1.4, kappa=0.8, delta_a0=-0.7, delta_c=1.3, g0=g0.conjugate(), eta0=-E, E=-eta),
            g_shape=g_shape, eta_shape=constant, position=(0.6, 0.0, 0.0), axis=CAVITY_AXIS,
        )
        first = DiffusionCalculator.diffusion_mean_field(original)
        second = DiffusionCalculator.diffusion_mean_field(swapped)
        assert second.steady.sigma_mean == pytest.approx(first.steady.a_mean, rel=1e-12)
        assert second.steady.a_mean == pytest.approx(first.steady.sigma_mean, rel=1e-12)
        assert second.two_D_atom == pytest.approx(first.two_D_mode, rel=1e-12)
        assert second.two_D_mode == pytest.approx(first.two_D_atom, rel=1e-12)

    def test_heating_rate_needs_mass(self):
        scene = fig3_scene()
        assert DiffusionCalculator.diffusion_mean_field(scene).heating_rate is None
        heavy = scene.with_params(mass=40.0)
        result = DiffusionCalculator.diffusion_mean_field(heavy)
        assert result.heating_rate == pytest.approx(result.two_D_total / 80.0)

    def test_validity_flags_warn_outside_harmonic_regime(self, mocker):
        logger = mocker.patch("src.physics.diffusion.physics_logger")
        weak = DiffusionCalculator.diffusion_mean_field(free_running_scene(eta0=0.01))
        assert weak.validity.ok
        logger.warning.assert_not_called()
        strong = DiffusionCalculator.diffusion_mean_field(free_running_scene(eta0=1.0))
        assert not strong.validity.P_e_small
        assert not strong.validity.ok
        logger.warning.assert_called_once()


class TestTensor:
    def test_tensor_is_symmetric_and_matches_axis_values(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            scene = random_scene(rng)
            result = DiffusionCalculator.diffusion_mean_field(scene)
            np.testing.assert_allclose(result.tensor, result.tensor.T, atol=1e-15)
            for i, axis in enumerate(np.eye(3)):
                along = DiffusionCalculator.diffusion_mean_field(scene, axis=axis)
                assert result.tensor[i, i] == pytest.approx(along.two_D_force, rel=1e-12, abs=1e-300)

    def test_projection_along_axis(self):
        """n^T D n reproduces the directional force diffusion for an oblique axis."""
        scene = fig2_scene(-3.0, axis=(1.0, 2.0, 0.5), position=(0.3, 0.1, 0.0))
        result = DiffusionCalculator.diffusion_mean_field(scene)
        assert result.axis @ result.tensor @ result.axis == pytest.approx(result.two_D_force, rel=1e-12)

    def test_spontaneous_block_is_isotropic_and_trace_preserving(self):
        result = DiffusionCalculator.diffusion_mean_field(fig3_scene())
        assert np.trace(result.spont_tensor) == pytest.approx(result.two_D_spont)
        np.testing.assert_allclose(result.spont_tensor, np.eye(3) * result.two_D_spont / 3.0)
        np.testing.assert_allclose(result.total_tensor, result.tensor + result.spont_tensor)


class TestMatrixForm:
    @pytest.mark.parametrize("delta_a", np.linspace(-10.0, 20.0, 13))
    def test_matches_mean_field_on_fig2_grid(self, delta_a):
        scene = fig2_scene(float(delta_a))
        mean_field = DiffusionCalculator.diffusion_mean_field(scene)
        matrix = DiffusionCalculator.diffusion_matrix_form(scene)
        assert relative(matrix.two_D_total, mean_field.two_D_total) < 1e-10
        assert relative(matrix.two_D_mode, mean_field.two_D_mode) < 1e-10

    def test_u_equals_i_hbar_m_grad_s(self):
        """hbar [grad I - i (grad M) S] = i hbar M grad S along any direction."""
        rng = np.random.default_rng(3)
        for _ in range(20):
            scene = random_scene(rng)
            _, system = SteadyStateSolver.steady_matrix(scene)
            _, gradients = DiffusionCalculator.gradient_analytic(scene)
            direction = scene.resolve_axis()
            u = DiffusionCalculator.u_vector(system, scene, direction=direction)
            grad_S = np.array(gradients.along(direction))
            expected = 1j * system.M @ grad_S
            assert np.linalg.norm(u - expected) <= 1e-12 * max(np.linalg.norm(u), 1e-300)

    def test_uncoupled_compact_form_is_diagonal_sum(self):
        scene = free_running_scene(0.1 + 0.05j, delta_a=1.5)
        matrix = DiffusionCalculator.diffusion_matrix_form(scene)
        mean_field = DiffusionCalculator.diffusion_mean_field(scene)
        assert matrix.two_D_force == pytest.approx(mean_field.two_D_atom + mean_field.two_D_mode, rel=1e-12)

    def test_triple_route_agreement_on_random_scenes(self):
        rng = np.random.default_rng(99)
        for _ in range(200):
            scene = random_scene(rng)
            mean_field = DiffusionCalculator.diffusion_mean_field(scene)
            matrix = DiffusionCalculator.diffusion_matrix_form(scene)
            finite = DiffusionCalculator.diffusion_finite_difference(scene)
            assert relative(matrix.two_D_total, mean_field.two_D_total) < 1e-10
            assert relative(finite.two_D_total, mean_field.two_D_total) < 1e-6


class TestFiniteDifference:
    def test_matches_analytic_gradients(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            scene = random_scene(rng)
            _, analytic = DiffusionCalculator.gradient_analytic(scene)
            numeric = DiffusionCalculator.gradient_fd(scene)
            for exact, approx in ((analytic.grad_sigma, numeric.grad_sigma), (analytic.grad_a, numeric.grad_a)):
                assert np.linalg.norm(approx - exact) <= 1e-6 * max(np.linalg.norm(exact), 1e-12)

    def test_constant_profiles_have_zero_gradients(self):
        params = SystemParams(g0=2.0, eta0=0.1, E=0.1, delta_a0=1.0)
        scene = SceneConfig.from_params(params, g_shape=FieldProfile.constant(1.0), eta_shape=FieldProfile.constant(1.0))
        gradients = DiffusionCalculator.gradient_fd(scene)
        assert np.all(gradients.grad_sigma == 0.0)
        assert np.all(gradients.grad_a == 0.0)

    def test_cavity_field_gradient_vanishes_at_antinode(self):
        """Atom-pumped cavity field is extremal along the cavity axis at an antinode."""
        scene = fig2_scene(5.0)
        gradients = DiffusionCalculator.gradient_fd(scene)
        assert abs(gradients.grad_a[0]) < 1e-8

    def test_richardson_reduces_truncation_error(self):
        scene = fig2_scene(12.0, axis=CAVITY_AXIS, position=(0.7, 0.2, 0.0))
        _, exact = DiffusionCalculator.gradient_analytic(scene)
        plain = DiffusionCalculator.gradient_fd(scene, step=1e-2)
        refined = DiffusionCalculator.gradient_fd(scene, step=1e-2, richardson=True)
        assert np.linalg.norm(refined.grad_a - exact.grad_a) < np.linalg.norm(plain.grad_a - exact.grad_a)

    @pytest.mark.parametrize("step", [0.0, -1e-3])
    def test_rejects_non_positive_step(self, step):
        with pytest.raises(SceneConfigError):
            DiffusionCalculator.gradient_fd(fig3_scene(), step=step)


class TestMeanForce:
    @pytest.mark.parametrize("delta_c", [-4.0, 0.0, 2.5])
    def test_side_force_equals_photon_removal_rate(self, delta_c):
        """Along a running side wave F = hbar k_L (2 gamma P_e + 2 kappa N_cav)."""
        scene = fig3_scene(delta_c)
        force = DiffusionCalculator.mean_force(scene)
        steady = SteadyStateSolver.steady_closed_form(scene)
        assert force.removal_rate == pytest.approx(2.0 * steady.P_e + 2.0 * steady.N_cav, rel=1e-12)
        assert force.force[1] == pytest.approx(force.removal_rate, rel=1e-12)
        assert force.force_atom[1] == pytest.approx(2.0 * steady.P_e, rel=1e-12)
        assert force.force_mode[1] == pytest.approx(2.0 * steady.N_cav, rel=1e-12)
        assert abs(force.force_coupling[1]) < 1e-14

    def test_decomposition_sums_to_total(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            force = DiffusionCalculator.mean_force(random_scene(rng))
            np.testing.assert_allclose(
                force.force_atom + force.force_mode + force.force_coupling, force.force, rtol=1e-10, atol=1e-14
            )

    def test_no_drive_no_force(self):
        scene = SceneConfig.from_params(
            SystemParams(g0=3.0, delta_a0=1.0),
            stark_shape=FieldProfile.standing(1.0, (1.0, 0.0, 0.0)),
            stark_depth=2.0,
            position=(0.4, 0.0, 0.0),
        )
        force = DiffusionCalculator.mean_force(scene)
        assert np.all(force.force == 0.0)
        assert force.removal_rate == 0.0


class TestCrossCheck:
    def test_passes_on_fig2_peak(self):
        assert DiffusionCalculator.cross_check(fig2_scene(12.0)) < 1e-10

    def test_raises_on_disagreement(self, mocker):
        scene = fig2_scene(-3.0)
        corrupted = DiffusionCalculator.diffusion_mean_field(scene.with_params(eta0=0.2))
        mocker.patch.object(DiffusionCalculator, "diffusion_matrix_form", return_value=corrupted)
        with pytest.raises(CrossCheckFailure):
            DiffusionCalculator.cross_check(scene)
