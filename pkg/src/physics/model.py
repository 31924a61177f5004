"""
Physical parameters, field profiles and scenes.

Units: gamma = 1, hbar = 1 and k = 1 unless configured otherwise. Frequencies are in
units of gamma and positions are optical phases (k.r dimensionless). Detunings follow
delta = omega_system - omega_L throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from utils.config import physics_logger
from utils.exceptions import SceneConfigError

Vector3 = tuple[float, float, float]


def _as_vector(values, name: str) -> np.ndarray:
    vector = np.asarray(values, dtype=float).reshape(-1)
    if vector.shape != (3,) or not np.all(np.isfinite(vector)):
        raise SceneConfigError(f"{name} must be a finite 3-vector, got {values!r}")
    return vector


class ProfileKind(str, Enum):
    CONSTANT = "constant"
    RUNNING = "running"
    STANDING = "standing"


@dataclass(frozen=True)
class SystemParams:
    """
    All physical rates, detunings and drives of the atom-cavity system, in units of gamma.

    Attributes:
        gamma (float): Atomic dipole relaxation rate; the unit of frequency.
        kappa (float): Cavity field decay rate.
        delta_a0 (float): Atom-laser detuning omega_eg - omega_L before Stark shifts.
        delta_c (float): Cavity-laser detuning omega_cav - omega_L.
        g0 (complex): Peak atom-cavity coupling (half the vacuum Rabi frequency).
        eta0 (complex): Peak side-drive amplitude (half the laser-atom Rabi frequency).
        E (complex): Cavity drive, normalised so |E|^2/(delta_c^2+kappa^2) is the empty-cavity photon number.
        k (float): Free-space emission wavenumber omega_eg/c.
        k_L (float): Side-laser wavenumber.
        k_cav (float): Cavity-mode wavenumber.
        mass (Optional[float]): Atomic mass; only used to report the heating rate D/m.
        hbar (float): Fixed to 1.
    """
    gamma: float = 1.0
    kappa: float = 1.0
    delta_a0: float = 0.0
    delta_c: float = 0.0
    g0: complex = 0.0
    eta0: complex = 0.0
    E: complex = 0.0
    k: float = 1.0
    k_L: float = 1.0
    k_cav: float = 1.0
    mass: Optional[float] = None
    hbar: float = field(default=1.0, init=False)

    def __post_init__(self):
        violations = self.violations()
        if violations:
            physics_logger.error(f"Invalid system parameters: {violations}")
            raise SceneConfigError(violations)

    def violations(self) -> list[str]:
        """Return every invariant violated by these parameters."""
        problems: list[str] = []
        for name in ("gamma", "kappa"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                problems.append(f"{name} must be > 0 (zero damping is rejected), got {value!r}")
        for name in ("k", "k_L", "k_cav"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                problems.append(f"{name} must be > 0, got {value!r}")
        for name in ("delta_a0", "delta_c"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                problems.append(f"{name} must be a finite real number, got {value!r}")
        for name in ("g0", "eta0", "E"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                problems.append(f"{name} must be finite, got {value!r}")
        if self.mass is not None and not (math.isfinite(self.mass) and self.mass > 0):
            problems.append(f"mass must be > 0 when given, got {self.mass!r}")
        return problems

    @property
    def delta_a_tilde(self) -> complex:
        """Complex atomic detuning delta_a0 - i gamma (no Stark shift)."""
        return complex(self.delta_a0, -self.gamma)

    @property
    def delta_c_tilde(self) -> complex:
        """Complex cavity detuning delta_c - i kappa."""
        return complex(self.delta_c, -self.kappa)

    @property
    def C0(self) -> float:
        """Peak cooperativity |g0|^2 / (2 kappa gamma)."""
        return abs(self.g0) ** 2 / (2.0 * self.kappa * self.gamma)


@dataclass(frozen=True)
class FieldProfile:
    """
    Position dependence of a coupling: constant, running wave or standing wave.

    A running wave evaluates amplitude * exp(i(q.r + phase)) and a standing wave
    amplitude * cos(q.r + phase), with q the wavevector.
    """
    kind: ProfileKind = ProfileKind.CONSTANT
    amplitude: complex = 0.0
    wavevector: Vector3 = (0.0, 0.0, 0.0)
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ProfileKind(self.kind))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        q = _as_vector(self.wavevector, "wavevector")
        object.__setattr__(self, "wavevector", tuple(float(c) for c in q))
        if not math.isfinite(self.phase):
            raise SceneConfigError(f"phase must be finite, got {self.phase!r}")
        if self.kind is ProfileKind.CONSTANT and np.any(q != 0.0):
            raise SceneConfigError("a constant profile cannot carry a wavevector")

    @classmethod
    def constant(cls, amplitude: complex) -> "FieldProfile":
        return cls(ProfileKind.CONSTANT, amplitude)

    @classmethod
    def running(cls, amplitude: complex, wavevector, phase: float = 0.0) -> "FieldProfile":
        return cls(ProfileKind.RUNNING, amplitude, tuple(wavevector), phase)

    @classmethod
    def standing(cls, amplitude: complex, wavevector, phase: float = 0.0) -> "FieldProfile":
        return cls(ProfileKind.STANDING, amplitude, tuple(wavevector), phase)

    @property
    def q(self) -> np.ndarray:
        return np.asarray(self.wavevector, dtype=float)

    def with_amplitude(self, amplitude: complex) -> "FieldProfile":
        return replace(self, amplitude=complex(amplitude))

    def value(self, r) -> complex:
        """Evaluate the profile at position r."""
        if self.kind is ProfileKind.CONSTANT:
            return self.amplitude
        argument = float(self.q @ np.asarray(r, dtype=float)) + self.phase
        if self.kind is ProfileKind.RUNNING:
            return self.amplitude * complex(math.cos(argument), math.sin(argument))
        return self.amplitude * math.cos(argument)

    def gradient(self, r) -> np.ndarray:
        """Exact analytic gradient of `value` at r, a complex 3-vector."""
        if self.kind is ProfileKind.CONSTANT:
            return np.zeros(3, dtype=complex)
        argument = float(self.q @ np.asarray(r, dtype=float)) + self.phase
        if self.kind is ProfileKind.RUNNING:
            return 1j * self.q * self.value(r)
        return -self.amplitude * math.sin(argument) * self.q.astype(complex)

    def period_along(self, axis) -> Optional[float]:
        """Spatial period along a unit axis, or None when the profile is constant along it."""
        projection = abs(float(self.q @ np.asarray(axis, dtype=float)))
        if self.kind is ProfileKind.CONSTANT or projection < 1e-15:
            return None
        return 2.0 * math.pi / projection


@dataclass(frozen=True)
class LocalFields:
    """Couplings and their gradients evaluated at one position."""
    g: complex
    grad_g: np.ndarray
    eta: complex
    grad_eta: np.ndarray
    delta_a: float
    grad_delta_a: np.ndarray


@dataclass(frozen=True)
class SceneConfig:
    """
    A complete physical scene: parameters, the three field profiles and a default
    evaluation point and axis.

    The amplitudes of `g_profile` and `eta_profile` are g0 and eta0 of `params`;
    `stark_profile` has a real amplitude added to delta_a0 to give delta_a(r).
    """
    params: SystemParams
    g_profile: FieldProfile
    eta_profile: FieldProfile
    stark_profile: FieldProfile = field(default_factory=lambda: FieldProfile.constant(0.0))
    position: Vector3 = (0.0, 0.0, 0.0)
    axis: Vector3 = (1.0, 0.0, 0.0)
    p_max: float = 0.1

    def __post_init__(self):
        problems: list[str] = []
        if abs(self.stark_profile.amplitude.imag) > 0.0:
            problems.append("stark_profile amplitude must be real")
        if self.g_profile.amplitude != complex(self.params.g0):
            problems.append("g_profile amplitude must equal params.g0")
        if self.eta_profile.amplitude != complex(self.params.eta0):
            problems.append("eta_profile amplitude must equal params.eta0")
        if not (0.0 < self.p_max < 1.0):
            problems.append(f"p_max must lie in (0, 1), got {self.p_max!r}")
        try:
            position = _as_vector(self.position, "position")
            axis = _as_vector(self.axis, "axis")
        except SceneConfigError as e:
            problems.extend(e.messages)
        else:
            norm = float(np.linalg.norm(axis))
            if norm == 0.0:
                problems.append("axis must be non-zero")
            else:
                object.__setattr__(self, "axis", tuple(float(c) for c in axis / norm))
            object.__setattr__(self, "position", tuple(float(c) for c in position))
        if problems:
            physics_logger.error(f"Invalid scene: {problems}")
            raise SceneConfigError(problems)

    @classmethod
    def from_params(
        cls,
        params: SystemParams,
        g_shape: FieldProfile | None = None,
        eta_shape: FieldProfile | None = None,
        stark_shape: FieldProfile | None = None,
        stark_depth: float = 0.0,
        position=(0.0, 0.0, 0.0),
        axis=(1.0, 0.0, 0.0),
        p_max: float = 0.1,
    ) -> "SceneConfig":
        """
        Build a scene whose profile amplitudes are taken from the parameters.

        Args:
            params (SystemParams): Physical parameters.
            g_shape (FieldProfile | None): Shape of g(r); its amplitude is replaced by g0.
                Defaults to a standing wave along x with wavenumber k_cav.
            eta_shape (FieldProfile | None): Shape of eta(r); amplitude replaced by eta0.
                Defaults to a running wave along y with wavenumber k_L.
            stark_shape (FieldProfile | None): Shape of the Stark shift; amplitude replaced by stark_depth.
            stark_depth (float): Real Stark-shift depth.
            position: Default evaluation position.
            axis: Default evaluation axis.
            p_max (float): Excitation threshold of the validity flags.

        Returns:
            SceneConfig: The validated scene.
        """
        g_shape = g_shape or FieldProfile.standing(1.0, (params.k_cav, 0.0, 0.0))
        eta_shape = eta_shape or FieldProfile.running(1.0, (0.0, params.k_L, 0.0))
        stark_shape = stark_shape or FieldProfile.constant(0.0)
        return cls(
            params=params,
            g_profile=g_shape.with_amplitude(params.g0),
            eta_profile=eta_shape.with_amplitude(params.eta0),
            stark_profile=stark_shape.with_amplitude(float(stark_depth)),
            position=tuple(position),
            axis=tuple(axis),
            p_max=p_max,
        )

    def with_params(self, **changes) -> "SceneConfig":
        """Return a copy with some SystemParams fields replaced; profile amplitudes follow g0 and eta0."""
        params = replace(self.params, **changes)
        return replace(
            self,
            params=params,
            g_profile=self.g_profile.with_amplitude(params.g0),
            eta_profile=self.eta_profile.with_amplitude(params.eta0),
        )

    def resolve_position(self, r=None) -> np.ndarray:
        return np.asarray(self.position if r is None else r, dtype=float)

    def resolve_axis(self, axis=None) -> np.ndarray:
        vector = np.asarray(self.axis if axis is None else axis, dtype=float)
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            raise SceneConfigError("axis must be non-zero")
        return vector / norm

    def local_fields(self, r=None) -> LocalFields:
        """
        Evaluate g, eta and the Stark-shifted detuning with their gradients at r.

        Args:
            r: Position 3-vector; the scene's default position when omitted.

        Returns:
            LocalFields: Complex g and eta with complex gradients, real delta_a with real gradient.
        """
        r = self.resolve_position(r)
        return LocalFields(
            g=self.g_profile.value(r),
            grad_g=self.g_profile.gradient(r),
            eta=self.eta_profile.value(r),
            grad_eta=self.eta_profile.gradient(r),
            delta_a=self.params.delta_a0 + self.stark_profile.value(r).real,
            grad_delta_a=self.stark_profile.gradient(r).real,
        )
