"""
Preset scenes and sweeps for the two normal-mode figures.

The sweep ranges bracket both normal modes; they are presentation choices.
"""
from __future__ import annotations

import math

from src.analysis.sweep import CAVITY_OFFSET, LASER_OFFSET, SweepSpec
from src.physics.model import FieldProfile, SceneConfig, SystemParams
from utils.config import cli_logger
from utils.exceptions import SceneConfigError

SIDE_AXIS = (0.0, 1.0, 0.0)
CAVITY_AXIS = (1.0, 0.0, 0.0)


def _fig2_params(**changes) -> SystemParams:
    # atom-cavity detuning delta_a - delta_c = 9; delta_a = -v along the omega_L sweep
    values = dict(gamma=1.0, kappa=1.0, g0=6.0, eta0=0.1, E=0.0, delta_a0=0.0, delta_c=-9.0)
    values.update(changes)
    return SystemParams(**values)


def fig2() -> SweepSpec:
    """Atom pumped by a running wave along y, atom at an antinode, diffusion along y."""
    scene = SceneConfig.from_params(
        _fig2_params(),
        g_shape=FieldProfile.standing(1.0, (1.0, 0.0, 0.0)),
        eta_shape=FieldProfile.running(1.0, (0.0, 1.0, 0.0)),
        position=(0.0, 0.0, 0.0),
        axis=SIDE_AXIS,
    )
    return SweepSpec(LASER_OFFSET, -20.0, 10.0, 500, scene)


def fig2_cavity() -> SweepSpec:
    """Cavity pumped with E = 0.1, atom halfway between node and antinode, diffusion along the cavity axis."""
    scene = SceneConfig.from_params(
        _fig2_params(eta0=0.0, E=0.1),
        g_shape=FieldProfile.standing(1.0, (1.0, 0.0, 0.0)),
        eta_shape=FieldProfile.constant(1.0),
        position=(math.pi / 4.0, 0.0, 0.0),
        axis=CAVITY_AXIS,
    )
    return SweepSpec(LASER_OFFSET, -20.0, 10.0, 500, scene)


def fig3() -> SweepSpec:
    """Atom pumped on resonance, cavity swept through the laser frequency, diffusion along y."""
    scene = SceneConfig.from_params(
        SystemParams(gamma=1.0, kappa=1.0, g0=3.0, eta0=0.1, E=0.0, delta_a0=0.0, delta_c=0.0),
        g_shape=FieldProfile.standing(1.0, (1.0, 0.0, 0.0)),
        eta_shape=FieldProfile.running(1.0, (0.0, 1.0, 0.0)),
        position=(0.0, 0.0, 0.0),
        axis=SIDE_AXIS,
    )
    return SweepSpec(CAVITY_OFFSET, -15.0, 15.0, 301, scene)


PRESETS = {"fig2": fig2, "fig2_cavity": fig2_cavity, "fig3": fig3}


def figure_preset(name: str) -> SweepSpec:
    """
    Sweep specification of a named figure preset.

    Args:
        name (str): fig2, fig2_cavity or fig3.

    Returns:
        SweepSpec: Fully populated sweep.

    Raises:
        SceneConfigError: If the name is unknown.
    """
    if name not in PRESETS:
        cli_logger.error(f"Unknown figure preset {name!r}")
        raise SceneConfigError(f"unknown figure preset {name!r}; choose from {', '.join(PRESETS)}")
    return PRESETS[name]()
