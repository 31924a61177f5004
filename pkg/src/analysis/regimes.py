from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from src.physics.diffusion import DiffusionCalculator, DiffusionResult, MeanGradients
from src.physics.model import SceneConfig
from src.physics.steady_state import SteadyState
from utils.config import analysis_logger
from utils.exceptions import SceneConfigError

Quantity = Union[str, Callable[[SceneConfig, np.ndarray], float]]


@dataclass(frozen=True)
class RegimeRatio:
    """A measured ratio next to its asymptotic prediction; no pass/fail judgement."""
    name: str
    measured: float
    predicted: float
    description: str

    @property
    def ratio(self) -> float:
        """measured / predicted; NaN when undefined."""
        if not math.isfinite(self.measured) or not self.predicted:
            return math.nan
        return self.measured / self.predicted

    @property
    def relative_deviation(self) -> float:
        return abs(self.ratio - 1.0) if math.isfinite(self.ratio) else math.nan


@dataclass(frozen=True)
class RegimeReport:
    local_mode_to_atom: RegimeRatio
    averaged_enhancement: RegimeRatio
    side_mode_to_atom: RegimeRatio
    averaged_mode_to_spont: RegimeRatio

    @property
    def entries(self) -> list[RegimeRatio]:
        return [self.local_mode_to_atom, self.averaged_enhancement, self.side_mode_to_atom, self.averaged_mode_to_spont]


class RegimeAnalysis:
    """
    Spatial averages along the cavity axis and the large-detuning regime laws.

    Quantities accepted by `spatial_average` are the names in QUANTITIES, evaluated with
    the mean-field diffusion along the diffusion axis, or any callable (scene, r) -> float.
    """

    GRID_POINTS: int = 512
    MIN_GRID_POINTS: int = 256
    COMMENSURABILITY_TOLERANCE: float = 1e-9
    QUANTITIES = ("two_D_spont", "two_D_atom", "two_D_mode", "two_D_total", "P_e", "N_cav")

    @classmethod
    def _safe_ratio(cls, numerator: float, denominator: float) -> float:
        return numerator / denominator if denominator != 0.0 else math.nan

    @classmethod
    def spatial_period(cls, scene: SceneConfig, axis) -> float | None:
        """
        Common period of every profile along the axis.

        Returns:
            float | None: The period, or None when nothing varies along the axis.

        Raises:
            SceneConfigError: If the profile periods along the axis are incommensurate.
        """
        axis = scene.resolve_axis(axis)
        periods = [
            p for p in (profile.period_along(axis) for profile in (scene.g_profile, scene.eta_profile, scene.stark_profile))
            if p is not None
        ]
        if not periods:
            return None
        period = max(periods)
        for p in periods:
            multiple = period / p
            if abs(multiple - round(multiple)) > cls.COMMENSURABILITY_TOLERANCE * multiple:
                analysis_logger.error(f"Profiles are not periodic along {axis}: periods {periods}")
                raise SceneConfigError(f"non-periodic profile along axis {tuple(axis)}: periods {periods}")
        return period

    @classmethod
    def _evaluator(cls, quantity: Quantity, diffusion_axis) -> Callable[[SceneConfig, np.ndarray], float]:
        if callable(quantity):
            return quantity
        if quantity not in cls.QUANTITIES:
            raise SceneConfigError(f"unknown quantity {quantity!r}; choose from {', '.join(cls.QUANTITIES)}")

        def evaluate(scene: SceneConfig, r: np.ndarray) -> float:
            result = DiffusionCalculator.diffusion_mean_field(scene, r, diffusion_axis)
            if quantity in ("P_e", "N_cav"):
                return getattr(result.steady, quantity)
            return getattr(result, quantity)

        return evaluate

    @classmethod
    def spatial_average(cls, scene: SceneConfig, axis=None, quantity: Quantity = "two_D_total", diffusion_axis=None,
                        r=None, points: int | None = None) -> float:
        """
        Average of a quantity over one spatial period along an axis.

        Args:
            scene (SceneConfig): The scene.
            axis: Averaging axis; the scene default when omitted.
            quantity (Quantity): A name from QUANTITIES or a callable (scene, r) -> float.
            diffusion_axis: Axis of the diffusion components; the averaging axis when omitted.
            r: Start of the averaging segment; the scene default position when omitted.
            points (int | None): Uniform grid size, at least MIN_GRID_POINTS.

        Returns:
            float: The mean over a uniform grid spanning one period.

        Raises:
            SceneConfigError: If the profiles are not periodic along the axis or the grid is too small.
        """
        axis = scene.resolve_axis(axis)
        points = cls.GRID_POINTS if points is None else points
        if points < cls.MIN_GRID_POINTS:
            raise SceneConfigError(f"spatial averages need at least {cls.MIN_GRID_POINTS} points, got {points}")
        evaluate = cls._evaluator(quantity, axis if diffusion_axis is None else diffusion_axis)
        origin = scene.resolve_position(r)
        period = cls.spatial_period(scene, axis)
        if period is None:
            return float(evaluate(scene, origin))
        offsets = np.arange(points) * (period / points)
        samples = [evaluate(scene, origin + s * axis) for s in offsets]
        return float(np.mean(samples))

    @classmethod
    def free_space_equivalent(cls, scene: SceneConfig, r=None, axis=None) -> DiffusionResult:
        """
        Free-space diffusion of an atom driven by eta_eq = eta + g E/delta_c~, the drive that
        gives the cavity excitation without the 1/(1 - nu) factor.

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.
            axis: Unit axis; the scene default when omitted.

        Returns:
            DiffusionResult: Free-space components (two_D_mode = 0).
        """
        fields = scene.local_fields(r)
        params = scene.params
        free_scene = scene.with_params(g0=0.0, E=0.0)
        da = complex(fields.delta_a, -params.gamma)
        dc = params.delta_c_tilde
        eta_eq = fields.eta + fields.g * params.E / dc
        grad_eta_eq = fields.grad_eta + fields.grad_g * params.E / dc
        sigma_mean = eta_eq / da
        grad_sigma = grad_eta_eq / da - eta_eq * fields.grad_delta_a / da**2
        steady = SteadyState.from_means(sigma_mean, 0.0, free_scene.local_fields(r), free_scene)
        gradients = MeanGradients(grad_sigma=grad_sigma, grad_a=np.zeros(3, dtype=complex))
        return DiffusionCalculator.from_gradients(free_scene, steady, gradients, axis)

    @classmethod
    def default_axes(cls, scene: SceneConfig) -> tuple[np.ndarray, np.ndarray]:
        """Cavity axis along the g wavevector (x if constant), side axis along the eta wavevector (y if constant)."""
        cavity_q, side_q = scene.g_profile.q, scene.eta_profile.q
        cavity_axis = cavity_q / np.linalg.norm(cavity_q) if np.any(cavity_q) else np.array([1.0, 0.0, 0.0])
        side_axis = side_q / np.linalg.norm(side_q) if np.any(side_q) else np.array([0.0, 1.0, 0.0])
        return cavity_axis, side_axis

    @classmethod
    def regime_report(cls, scene: SceneConfig, r=None, cavity_axis=None, side_axis=None,
                      points: int | None = None) -> RegimeReport:
        """
        Measured regime ratios next to their large-detuning predictions.

        (a) local D_mode/D_atom along the cavity axis vs 8C (cavity pumped, delta_c = 0);
        (b) period-averaged total over the free-space-equivalent total vs 1 + C0;
        (c) D_mode/D_atom along the side axis vs 2C (atom pumped, delta_a = delta_c = 0, exact);
        (d) period-averaged D_mode over the spontaneous term vs C0 (atom pumped, delta_c = 0).

        The caller chooses a scene in the intended regime; no pass/fail judgement is made.

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.
            cavity_axis: Defaults to the g-profile wavevector direction.
            side_axis: Defaults to the eta-profile wavevector direction.
            points (int | None): Grid size of the spatial averages.

        Returns:
            RegimeReport: The four ratios.
        """
        default_cavity, default_side = cls.default_axes(scene)
        cavity_axis = default_cavity if cavity_axis is None else scene.resolve_axis(cavity_axis)
        side_axis = default_side if side_axis is None else scene.resolve_axis(side_axis)
        r = scene.resolve_position(r)
        params = scene.params
        C_local = abs(scene.g_profile.value(r)) ** 2 / (2.0 * params.kappa * params.gamma)
        C0 = params.C0

        along_cavity = DiffusionCalculator.diffusion_mean_field(scene, r, cavity_axis)
        local = RegimeRatio(
            name="local_mode_to_atom",
            measured=cls._safe_ratio(along_cavity.two_D_mode, along_cavity.two_D_atom),
            predicted=8.0 * C_local,
            description="D_mode/D_atom along the cavity axis vs 8C",
        )

        averaged_total = cls.spatial_average(scene, cavity_axis, "two_D_total", r=r, points=points)
        averaged_free = cls.spatial_average(
            scene, cavity_axis, lambda s, x: cls.free_space_equivalent(s, x, cavity_axis).two_D_total, r=r, points=points
        )
        enhancement = RegimeRatio(
            name="averaged_enhancement",
            measured=cls._safe_ratio(averaged_total, averaged_free),
            predicted=1.0 + C0,
            description="averaged total over free-space-equivalent total vs 1 + C0",
        )

        along_side = DiffusionCalculator.diffusion_mean_field(scene, r, side_axis)
        side = RegimeRatio(
            name="side_mode_to_atom",
            measured=cls._safe_ratio(along_side.two_D_mode, along_side.two_D_atom),
            predicted=2.0 * C_local,
            description="D_mode/D_atom along the side axis vs 2C",
        )

        averaged_mode = cls.spatial_average(scene, cavity_axis, "two_D_mode", r=r, points=points)
        averaged_spont = cls.spatial_average(scene, cavity_axis, "two_D_spont", r=r, points=points)
        mode_to_spont = RegimeRatio(
            name="averaged_mode_to_spont",
            measured=cls._safe_ratio(averaged_mode, averaged_spont),
            predicted=C0,
            description="averaged D_mode over spontaneous term vs C0",
        )

        report = RegimeReport(local, enhancement, side, mode_to_spont)
        for entry in report.entries:
            analysis_logger.info(f"{entry.name}: measured {entry.measured:.6g}, predicted {entry.predicted:.6g}")
        return report
