from dataclasses import replace

import numpy as np
import pytest

from scene_factory import dark_state_scene, fig2_scene, random_scene
from src.physics.model import FieldProfile, SceneConfig, SystemParams
from src.physics.steady_state import OscillatorMatrix, SteadyStateSolver
from utils.exceptions import CrossCheckFailure


def constant_scene(**values) -> SceneConfig:
    params = SystemParams(**values)
    return SceneConfig.from_params(params, g_shape=FieldProfile.constant(1.0), eta_shape=FieldProfile.constant(1.0))


HAND_EXAMPLES = [
    # (parameters, <sigma>, <a>)
    (dict(gamma=1.0, kappa=1.0, g0=1.0, eta0=0.1), 0.05j, 0.05),
    (dict(gamma=1.0, kappa=1.0, g0=2.0, E=1.0, eta0=-2.0j), 0.0, -1.0j),
    (dict(gamma=1.0, kappa=1.0, delta_a0=2.0, delta_c=-1.0, eta0=0.3, E=0.5), 0.3 / complex(2.0, -1.0), -0.5 / complex(-1.0, -1.0)),
]


class TestSteadyClosedForm:
    @pytest.mark.parametrize("values, sigma, a", HAND_EXAMPLES)
    def test_hand_evaluated_examples(self, values, sigma, a):
        """Decoupled limit, the nu = -1 resonance and the dark state, evaluated by hand."""
        steady = SteadyStateSolver.steady_closed_form(constant_scene(**values))
        assert steady.sigma_mean == pytest.approx(sigma, abs=1e-15)
        assert steady.a_mean == pytest.approx(a, abs=1e-15)

    def test_nu_at_double_resonance(self):
        steady = SteadyStateSolver.steady_closed_form(constant_scene(g0=1.0, eta0=0.1))
        assert steady.nu == pytest.approx(-1.0)
        assert steady.one_minus_nu_sq == pytest.approx(4.0)

    def test_derived_fields_are_consistent(self):
        """<sigma> = Omega_atom / delta_a~, <a> = -Omega_mode / delta_c~, P_e = |<sigma>|^2."""
        rng = np.random.default_rng(7)
        for _ in range(20):
            scene = random_scene(rng)
            steady = SteadyStateSolver.steady_closed_form(scene)
            assert steady.sigma_mean == pytest.approx(steady.omega_atom / steady.delta_a_tilde, rel=1e-12, abs=1e-15)
            assert steady.a_mean == pytest.approx(-steady.omega_mode / steady.delta_c_tilde, rel=1e-12, abs=1e-15)
            assert steady.P_e == pytest.approx(abs(steady.sigma_mean) ** 2)
            assert steady.N_cav == pytest.approx(abs(steady.a_mean) ** 2)

    def test_no_drive_null_state(self):
        steady = SteadyStateSolver.steady_closed_form(constant_scene(g0=3.0, delta_a0=1.0))
        assert steady.sigma_mean == 0.0
        assert steady.a_mean == 0.0
        assert steady.P_e == 0.0 and steady.N_cav == 0.0

    def test_dark_state_cancels_atomic_excitation(self):
        scene = dark_state_scene(g0=1.0, E=0.2, delta_a=1.5, delta_c=-0.5)
        steady = SteadyStateSolver.steady_closed_form(scene)
        assert abs(steady.sigma_mean) < 1e-15
        assert steady.a_mean == pytest.approx(-0.2 / complex(-0.5, -1.0), rel=1e-14)

    def test_damping_keeps_one_minus_nu_away_from_zero(self):
        """|1 - nu| stays bounded below over a detuning grid around the normal modes."""
        scene = constant_scene(g0=6.0, eta0=0.1)
        detunings = np.linspace(-20.0, 20.0, 81)
        smallest = min(
            SteadyStateSolver.steady_closed_form(scene.with_params(delta_a0=da, delta_c=dc)).one_minus_nu_sq
            for da in detunings
            for dc in detunings
        )
        assert smallest > 1e-3

    def test_cavity_field_has_two_normal_mode_maxima(self):
        """|<a>| over the laser frequency peaks near the roots of delta_a delta_c = |g|^2."""
        detunings = np.linspace(-10.0, 20.0, 601)
        field = np.array([abs(SteadyStateSolver.steady_closed_form(fig2_scene(da)).a_mean) for da in detunings])
        interior = (field[1:-1] > field[:-2]) & (field[1:-1] > field[2:])
        maxima = detunings[1:-1][interior]
        assert len(maxima) == 2
        assert maxima[0] == pytest.approx(-3.0, abs=1.0)
        assert maxima[1] == pytest.approx(12.0, abs=1.0)


class TestSteadyMatrix:
    @pytest.mark.parametrize("values, sigma, a", HAND_EXAMPLES)
    def test_matches_hand_examples(self, values, sigma, a):
        steady, system = SteadyStateSolver.steady_matrix(constant_scene(**values))
        assert steady.sigma_mean == pytest.approx(sigma, abs=1e-14)
        assert steady.a_mean == pytest.approx(a, abs=1e-14)
        assert system.residual() < 1e-12

    def test_uncoupled_matrix_is_diagonal(self):
        _, system = SteadyStateSolver.steady_matrix(constant_scene(delta_a0=1.0, eta0=0.1, E=0.2))
        assert system.M[0, 1] == 0.0 and system.M[1, 0] == 0.0

    def test_dissipative_part(self):
        """P + P^dag is diag(-2 gamma, -2 kappa)."""
        scene = constant_scene(gamma=0.7, kappa=1.3, delta_a0=2.0, delta_c=-4.0, g0=1.0 + 2.0j)
        system = OscillatorMatrix.build(scene.local_fields(), scene)
        np.testing.assert_allclose(system.P + system.P.conj().T, np.diag([-1.4, -2.6]), atol=1e-15)

    def test_route_equivalence_on_random_scenes(self):
        """Closed form and matrix solve agree for complex g, Stark shifts and random geometry."""
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(100):
            scene = random_scene(rng)
            worst = max(worst, SteadyStateSolver.cross_check(scene, tolerance=1e-12))
        assert worst < 1e-12


class TestCrossCheck:
    def test_passes_and_reports_deviation(self):
        deviation = SteadyStateSolver.cross_check(fig2_scene(12.0))
        assert 0.0 <= deviation < 1e-12

    def test_raises_when_routes_disagree(self, mocker):
        """A corrupted matrix route is reported as a cross-check failure."""
        scene = fig2_scene(12.0)
        steady, system = SteadyStateSolver.steady_matrix(scene)
        shifted = replace(steady, sigma_mean=steady.sigma_mean * 1.01)
        mocker.patch.object(SteadyStateSolver, "steady_matrix", return_value=(shifted, system))
        with pytest.raises(CrossCheckFailure) as excinfo:
            SteadyStateSolver.cross_check(scene)
        assert excinfo.value.exit_code == 4
