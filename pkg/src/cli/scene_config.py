from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.physics.model import FieldProfile, ProfileKind, SceneConfig, SystemParams
from utils.config import cli_logger
from utils.exceptions import SceneConfigError

REAL_KEYS = ("gamma", "kappa", "delta_a", "delta_c", "k", "k_L", "k_cav", "mass", "stark_depth", "x", "y", "z", "p_max")
COMPLEX_KEYS = ("g0", "eta0", "E")
PROFILE_KEYS = ("g_profile", "eta_profile", "stark_profile")
CONFIG_KEYS = (
    *REAL_KEYS[:4],
    *(f"{name}_{part}" for name in COMPLEX_KEYS for part in ("re", "im")),
    *REAL_KEYS[4:],
    *PROFILE_KEYS,
    "axis",
)
UNIT_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
SUBCOMMANDS = ("steady", "diffusion", "sweep", "oracle", "regime", "figure")


@dataclass(frozen=True)
class RunConfig:
    """
    How a subcommand runs and writes its output; the physics lives in SceneConfig.

    Attributes:
        subcommand (str): One of SUBCOMMANDS.
        precision (int): Significant digits of every float in the CSV, in [6, 17].
        cross_check (bool): Run the closed-form versus matrix cross-checks first.
        n_atom (int): Oracle Fock cutoff of the atom.
        n_cav (int): Oracle Fock cutoff of the cavity.
        output (Optional[str]): Output path; stdout when None.
        config_path (Optional[str]): Scene file the run was read from, for the header.
    """
    subcommand: str
    precision: int = 9
    cross_check: bool = False
    n_atom: int = 6
    n_cav: int = 6
    output: Optional[str] = None
    config_path: Optional[str] = None

    def __post_init__(self):
        problems = []
        if self.subcommand not in SUBCOMMANDS:
            problems.append(f"unknown subcommand {self.subcommand!r}")
        if not 6 <= self.precision <= 17:
            problems.append(f"precision must lie in [6, 17], got {self.precision}")
        if problems:
            cli_logger.error(f"Invalid run configuration: {problems}")
            raise SceneConfigError(problems)

    @property
    def float_format(self) -> str:
        return f"%.{self.precision}g"


def _parse_axis(text: str) -> tuple[float, float, float]:
    text = text.strip().lower()
    if text in UNIT_AXES:
        return UNIT_AXES[text]
    parts = [float(part) for part in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"axis needs x, y, z or three comma-separated numbers, got {text!r}")
    if not any(parts):
        raise ValueError("axis must be non-zero")
    return tuple(parts)


def _parse_profile(text: str, default_axis: str, default_k: float) -> FieldProfile:
    """Parse kind[:axis[:k[:phase]]]; the amplitude is filled in later from the parameters."""
    fields = text.strip().split(":")
    if len(fields) > 4:
        raise ValueError(f"profile needs at most kind:axis:k:phase, got {text!r}")
    kind = ProfileKind(fields[0].strip().lower())
    if kind is ProfileKind.CONSTANT:
        if len(fields) > 1:
            raise ValueError("a constant profile takes no axis, wavenumber or phase")
        return FieldProfile.constant(1.0)
    direction = np.asarray(_parse_axis(fields[1] if len(fields) > 1 and fields[1] else default_axis))
    k = float(fields[2]) if len(fields) > 2 and fields[2] else default_k
    phase = float(fields[3]) if len(fields) > 3 and fields[3] else 0.0
    wavevector = k * direction / np.linalg.norm(direction)
    return FieldProfile(kind, 1.0, tuple(wavevector), phase)


def _read_pairs(text: str) -> tuple[dict[str, tuple[int, str]], list[str]]:
    pairs: dict[str, tuple[int, str]] = {}
    problems: list[str] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {line_number}: expected key=value, got {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            problems.append(f"line {line_number}: unknown key {key!r}")
        elif key in pairs:
            problems.append(f"line {line_number}: duplicate key {key!r} (first set on line {pairs[key][0]})")
        else:
            pairs[key] = (line_number, value)
    return pairs, problems


def parse_config(text: str, overrides: Optional[dict[str, str]] = None) -> SceneConfig:
    """
    Parse a flat key=value scene description.

    Blank lines and `#` comments are ignored. Complex inputs use separate `_re`/`_im`
    keys. Profiles use kind[:axis[:k[:phase]]] with kind constant, running or standing;
    the axis defaults to x for g and Stark profiles and y for eta, and a missing k to
    k_cav for g and Stark profiles and k_L for eta.

    Args:
        text (str): The configuration text.
        overrides (Optional[dict[str, str]]): Values taking precedence over the text,
            typically from command-line flags.

    Returns:
        SceneConfig: The validated scene.

    Raises:
        SceneConfigError: Listing every parse error (with line numbers) and every
            violated invariant.
    """
    pairs, problems = _read_pairs(text)
    for key, value in (overrides or {}).items():
        if key not in CONFIG_KEYS:
            problems.append(f"override: unknown key {key!r}")
        elif value is not None:
            pairs[key] = (0, str(value))

    def where(key: str) -> str:
        line = pairs[key][0]
        return f"line {line}" if line else "override"

    numbers: dict[str, float] = {}
    for key, (_, value) in pairs.items():
        if key in PROFILE_KEYS or key == "axis":
            continue
        try:
            number = float(value)
        except ValueError:
            problems.append(f"{where(key)}: {key} expects a number, got {value!r}")
            continue
        if not math.isfinite(number):
            problems.append(f"{where(key)}: {key} must be finite, got {value!r}")
            continue
        numbers[key] = number

    def complex_value(name: str) -> complex:
        return complex(numbers.get(f"{name}_re", 0.0), numbers.get(f"{name}_im", 0.0))

    params: Optional[SystemParams] = None
    try:
        params = SystemParams(
            gamma=numbers.get("gamma", 1.0),
            kappa=numbers.get("kappa", 1.0),
            delta_a0=numbers.get("delta_a", 0.0),
            delta_c=numbers.get("delta_c", 0.0),
            g0=complex_value("g0"),
            eta0=complex_value("eta0"),
            E=complex_value("E"),
            k=numbers.get("k", 1.0),
            k_L=numbers.get("k_L", 1.0),
            k_cav=numbers.get("k_cav", 1.0),
            mass=numbers.get("mass"),
        )
    except SceneConfigError as e:
        problems.extend(e.messages)

    k_cav = numbers.get("k_cav", 1.0)
    k_L = numbers.get("k_L", 1.0)
    profile_defaults = {"g_profile": ("x", k_cav), "eta_profile": ("y", k_L), "stark_profile": ("x", k_cav)}
    shapes: dict[str, Optional[FieldProfile]] = {key: None for key in PROFILE_KEYS}
    for key, (default_axis, default_k) in profile_defaults.items():
        if key in pairs:
            try:
                shapes[key] = _parse_profile(pairs[key][1], default_axis, default_k)
            except (ValueError, SceneConfigError) as e:
                problems.append(f"{where(key)}: {key}: {e}")

    axis = UNIT_AXES["x"]
    if "axis" in pairs:
        try:
            axis = _parse_axis(pairs["axis"][1])
        except ValueError as e:
            problems.append(f"{where('axis')}: axis: {e}")

    if "stark_depth" in numbers and shapes["stark_profile"] is None:
        problems.append(f"{where('stark_depth')}: stark_depth needs a stark_profile")

    if problems or params is None:
        cli_logger.error(f"Rejected scene configuration: {problems}")
        raise SceneConfigError(problems)

    try:
        scene = SceneConfig.from_params(
            params,
            g_shape=shapes["g_profile"],
            eta_shape=shapes["eta_profile"],
            stark_shape=shapes["stark_profile"],
            stark_depth=numbers.get("stark_depth", 0.0),
            position=(numbers.get("x", 0.0), numbers.get("y", 0.0), numbers.get("z", 0.0)),
            axis=axis,
            p_max=numbers.get("p_max", 0.1),
        )
    except SceneConfigError as e:
        cli_logger.error(f"Rejected scene configuration: {e.messages}")
        raise
    cli_logger.info(f"Parsed scene with {len(pairs)} key(s).")
    return scene


def _format_number(value: float) -> str:
    return repr(float(value))


def _format_profile(profile: FieldProfile) -> str:
    if profile.kind is ProfileKind.CONSTANT:
        return profile.kind.value
    k = float(np.linalg.norm(profile.q))
    direction = ",".join(_format_number(c) for c in profile.q / k)
    return f"{profile.kind.value}:{direction}:{_format_number(k)}:{_format_number(profile.phase)}"


def format_scene(scene: SceneConfig) -> list[str]:
    """
    Echo a scene as key=value items in CONFIG_KEYS order.

    Floats are written with repr, so joining the items with newlines and parsing them
    again gives back the same scene.
    """
    params = scene.params
    values = {
        "gamma": params.gamma,
        "kappa": params.kappa,
        "delta_a": params.delta_a0,
        "delta_c": params.delta_c,
        "k": params.k,
        "k_L": params.k_L,
        "k_cav": params.k_cav,
        "stark_depth": scene.stark_profile.amplitude.real,
        "x": scene.position[0],
        "y": scene.position[1],
        "z": scene.position[2],
        "p_max": scene.p_max,
    }
    for name in COMPLEX_KEYS:
        value = complex(getattr(params, name))
        values[f"{name}_re"], values[f"{name}_im"] = value.real, value.imag

    items = []
    for key in CONFIG_KEYS:
        if key in PROFILE_KEYS:
            items.append(f"{key}={_format_profile(getattr(scene, key))}")
        elif key == "axis":
            items.append(f"axis={','.join(_format_number(c) for c in scene.axis)}")
        elif key == "mass":
            if params.mass is not None:
                items.append(f"mass={_format_number(params.mass)}")
        else:
            items.append(f"{key}={_format_number(values[key])}")
    return items
