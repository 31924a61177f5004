from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from src.physics.diffusion import DiffusionCalculator
from src.physics.model import SceneConfig, SystemParams
from src.physics.steady_state import SteadyStateSolver
from utils.config import analysis_logger
from utils.exceptions import SceneConfigError

LASER_OFFSET = "omega_L"
CAVITY_OFFSET = "omega_cav"
POSITION_COMPONENTS = {"x": 0, "y": 1, "z": 2}
PARAM_FIELDS = tuple(f.name for f in fields(SystemParams) if f.init)
# config-file spellings; `_re`/`_im` set one part of a complex drive
CONFIG_ALIASES = {
    "delta_a": "delta_a0",
    **{f"{name}_{part}": name for name in ("g0", "eta0", "E") for part in ("re", "im")},
}
SWEEPABLE = (LASER_OFFSET, CAVITY_OFFSET, *POSITION_COMPONENTS, *PARAM_FIELDS, *CONFIG_ALIASES)


@dataclass(frozen=True)
class SweepSpec:
    """
    A one-dimensional parameter sweep.

    `omega_L` shifts the laser by v (delta_a = delta_a0 - v, delta_c = delta_c0 - v),
    `omega_cav` shifts the cavity by v (delta_c = delta_c0 + v), `x`/`y`/`z` set a position
    component, and any SystemParams field is set to v directly. Config keys such as
    `delta_a` or `eta0_re` are accepted for the matching field.
    """
    parameter: str
    start: float
    stop: float
    steps: int
    scene: SceneConfig
    position: Optional[tuple[float, float, float]] = None
    axis: Optional[tuple[float, float, float]] = None

    def __post_init__(self):
        problems = []
        if self.parameter not in SWEEPABLE:
            problems.append(f"unknown sweep parameter {self.parameter!r}; choose from {', '.join(SWEEPABLE)}")
        if not self.start < self.stop:
            problems.append(f"sweep requires from < to, got {self.start} >= {self.stop}")
        if int(self.steps) != self.steps or self.steps < 2:
            problems.append(f"steps must be an integer >= 2, got {self.steps!r}")
        if problems:
            analysis_logger.error(f"Invalid sweep specification: {problems}")
            raise SceneConfigError(problems)

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.steps))

    def scene_at(self, value: float) -> tuple[SceneConfig, np.ndarray]:
        """Scene and evaluation position for one swept value."""
        scene = self.scene
        position = scene.resolve_position(self.position).copy()
        params = scene.params
        if self.parameter == LASER_OFFSET:
            scene = scene.with_params(delta_a0=params.delta_a0 - value, delta_c=params.delta_c - value)
        elif self.parameter == CAVITY_OFFSET:
            scene = scene.with_params(delta_c=params.delta_c + value)
        elif self.parameter in POSITION_COMPONENTS:
            position[POSITION_COMPONENTS[self.parameter]] = value
        elif self.parameter in ("k_L", "k_cav"):
            scale = value / getattr(params, self.parameter)
            scene = scene.with_params(**{self.parameter: value})
            if self.parameter == "k_L":
                scene = replace(scene, eta_profile=replace(scene.eta_profile, wavevector=tuple(scale * scene.eta_profile.q)))
            else:
                scene = replace(
                    scene,
                    g_profile=replace(scene.g_profile, wavevector=tuple(scale * scene.g_profile.q)),
                    stark_profile=replace(scene.stark_profile, wavevector=tuple(scale * scene.stark_profile.q)),
                )
        else:
            scene = scene.with_params(**self._param_update(params, value))
        return scene, position

    def _param_update(self, params: SystemParams, value: float) -> dict[str, float | complex]:
        name = CONFIG_ALIASES.get(self.parameter, self.parameter)
        if self.parameter.endswith("_re"):
            return {name: complex(value, complex(getattr(params, name)).imag)}
        if self.parameter.endswith("_im"):
            return {name: complex(complex(getattr(params, name)).real, value)}
        return {name: value}


@dataclass(frozen=True)
class SweepRow:
    """One evaluated sweep point."""
    value: float
    two_D_spont: float
    two_D_atom: float
    two_D_mode: float
    two_D_total: float
    P_e: float
    N_cav: float
    one_minus_nu_sq: float


PEAK_COLUMNS = tuple(f.name for f in fields(SweepRow) if f.name != "value")


@dataclass(frozen=True)
class Peak:
    """An interior local maximum refined by a parabola through three points."""
    location: float
    height: float
    dominant_component: str
    index: int


class ParameterSweep:
    """Sweeps of the mean-field diffusion and normal-mode peak extraction."""

    @classmethod
    def evaluate(cls, spec: SweepSpec, value: float, cross_check: bool = False) -> SweepRow:
        scene, position = spec.scene_at(value)
        if cross_check:
            SteadyStateSolver.cross_check(scene, position)
            DiffusionCalculator.cross_check(scene, position, spec.axis)
        result = DiffusionCalculator.diffusion_mean_field(scene, position, spec.axis)
        return SweepRow(
            value=float(value),
            two_D_spont=result.two_D_spont,
            two_D_atom=result.two_D_atom,
            two_D_mode=result.two_D_mode,
            two_D_total=result.two_D_total,
            P_e=result.steady.P_e,
            N_cav=result.steady.N_cav,
            one_minus_nu_sq=result.steady.one_minus_nu_sq,
        )

    @classmethod
    def sweep(cls, spec: SweepSpec, workers: int = 1, cross_check: bool = False) -> list[SweepRow]:
        """
        Evaluate the mean-field diffusion at every swept value.

        Args:
            spec (SweepSpec): What to sweep and where to evaluate.
            workers (int): Worker threads; rows keep the order of the swept values.
            cross_check (bool): Also run the steady-state and diffusion route cross-checks.

        Returns:
            list[SweepRow]: One row per value, in increasing order.
        """
        values = spec.values
        analysis_logger.info(f"Sweeping {spec.parameter} over [{spec.start}, {spec.stop}] in {len(values)} steps")
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda v: cls.evaluate(spec, v, cross_check), values))
        else:
            rows = [cls.evaluate(spec, v, cross_check) for v in values]
        analysis_logger.info(f"Sweep of {spec.parameter} finished with {len(rows)} rows")
        return rows

    @classmethod
    def find_peaks(cls, rows: list[SweepRow], column: str = "two_D_total") -> list[Peak]:
        """
        Interior local maxima of a column with sub-grid parabolic refinement.

        Args:
            rows (list[SweepRow]): Sweep rows ordered by value.
            column (str): Column to search, two_D_total by default.

        Returns:
            list[Peak]: Peaks in increasing location; empty for monotone data. The dominant
            component is "atom" or "mode", whichever of two_D_atom and two_D_mode is larger.

        Raises:
            SceneConfigError: If fewer than three rows are given or the column is unknown.
        """
        if column not in PEAK_COLUMNS:
            analysis_logger.error(f"Unknown peak column {column!r}")
            raise SceneConfigError(f"unknown peak column {column!r}; choose from {', '.join(PEAK_COLUMNS)}")
        if len(rows) < 3:
            raise SceneConfigError(f"find_peaks needs at least 3 rows, got {len(rows)}")
        x = np.array([row.value for row in rows])
        y = np.array([getattr(row, column) for row in rows])
        peaks = []
        for i in range(1, len(rows) - 1):
            if not (y[i] > y[i - 1] and y[i] >= y[i + 1]):
                continue
            a, b, c = np.polyfit(x[i - 1:i + 2] - x[i], y[i - 1:i + 2], 2)
            if a < 0:
                offset = -b / (2.0 * a)
                location, height = x[i] + offset, c - b * b / (4.0 * a)
            else:
                location, height = x[i], y[i]
            dominant = "atom" if rows[i].two_D_atom >= rows[i].two_D_mode else "mode"
            peaks.append(Peak(location=float(location), height=float(height), dominant_component=dominant, index=i))
        analysis_logger.info(f"Found {len(peaks)} peak(s) in {column}")
        return peaks
