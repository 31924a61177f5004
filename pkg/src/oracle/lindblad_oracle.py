from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import qutip

from src.oracle.truncated_space import DensityMatrix, TruncatedSpace
from src.physics.model import SceneConfig
from utils.config import oracle_logger
from utils.exceptions import DegenerateKernelError, NumericalFailure
from utils.linalg_utils import LinalgUtils


def _vec(operator: np.ndarray) -> np.ndarray:
    """Column-stacking vectorisation, vec(A rho B) = (B^T kron A) vec(rho)."""
    return operator.reshape(-1, order="F")


def _unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    return vector.reshape(dim, dim, order="F")


@dataclass(frozen=True)
class OracleDiffusion:
    """
    Brute-force diffusion from the truncated master equation.

    Attributes:
        two_D_force (float): Symmetrised force-fluctuation diffusion along the axis.
        imag_residual (float): |Im| / |Re| of the symmetrised regression integral.
        two_D_spont (float): (hbar k)^2 2 gamma <sigma^dag sigma>, added analytically.
        sigma_mean (complex): Tr[sigma rho].
        a_mean (complex): Tr[a rho].
        P_e (float): <sigma^dag sigma>.
        N_cav (float): <a^dag a>.
        purity (float): Tr rho^2.
        harmonic_residual (float): <sigma^dag sigma> - |<sigma>|^2.
        density (DensityMatrix): The stationary state.
    """
    two_D_force: float
    imag_residual: float
    two_D_spont: float
    sigma_mean: complex
    a_mean: complex
    P_e: float
    N_cav: float
    purity: float
    harmonic_residual: float
    density: DensityMatrix

    @property
    def two_D_total(self) -> float:
        return self.two_D_force + self.two_D_spont


class LindbladOracle(LinalgUtils):
    """
    Verification route built only from the Hamiltonian and the master equation.

    The atom is a truncated harmonic oscillator, the position is a fixed parameter and
    the diffusion is the symmetrised force autocorrelation integral, evaluated with
    the quantum regression theorem by a deflated linear solve.
    """

    LOGGER = oracle_logger
    IMAG_TOLERANCE: float = 1e-8

    @classmethod
    def hamiltonian(cls, scene: SceneConfig, r, space: TruncatedSpace) -> np.ndarray:
        """
        Driven Jaynes-Cummings Hamiltonian (hbar = 1) at fixed position r.

        H = delta_a s^dag s - eta s^dag - eta* s + delta_c a^dag a + E a^dag + E* a + g a s^dag + g* a^dag s.
        """
        fields = scene.local_fields(r)
        params = scene.params
        s, a = space.sigma, space.a
        sd, ad = s.conj().T, a.conj().T
        return (
            fields.delta_a * sd @ s
            - fields.eta * sd
            - np.conj(fields.eta) * s
            + params.delta_c * ad @ a
            + params.E * ad
            + np.conj(params.E) * a
            + fields.g * a @ sd
            + np.conj(fields.g) * ad @ s
        )

    @classmethod
    def force_operator(cls, scene: SceneConfig, r, axis, space: TruncatedSpace) -> np.ndarray:
        """Hermitian force operator -n.grad H along the unit axis n."""
        fields = scene.local_fields(r)
        n = scene.resolve_axis(axis)
        d_eta = complex(n @ fields.grad_eta)
        d_g = complex(n @ fields.grad_g)
        d_delta_a = float(n @ fields.grad_delta_a)
        s, a = space.sigma, space.a
        sd, ad = s.conj().T, a.conj().T
        grad_h = (
            d_delta_a * sd @ s
            - d_eta * sd
            - np.conj(d_eta) * s
            + d_g * a @ sd
            + np.conj(d_g) * ad @ s
        )
        return -scene.params.hbar * grad_h

    @classmethod
    def build_liouvillian(cls, scene: SceneConfig, r, space: TruncatedSpace) -> np.ndarray:
        """
        Liouvillian L[rho] = -i[H, rho] + kappa D[a] rho + gamma D[sigma] rho as a dim^2 x dim^2 matrix.

        The recoil phases of the atomic decay act trivially on internal states at fixed r
        and are omitted.

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.
            space (TruncatedSpace): Truncated two-oscillator space.

        Returns:
            np.ndarray: Column-stacking superoperator.
        """
        params = scene.params
        H = qutip.Qobj(cls.hamiltonian(scene, r, space))
        collapse = [
            math.sqrt(2.0 * params.kappa) * qutip.Qobj(space.a),
            math.sqrt(2.0 * params.gamma) * qutip.Qobj(space.sigma),
        ]
        liouvillian = qutip.liouvillian(H, collapse).full()
        cls.LOGGER.info(f"Built Liouvillian for cutoffs ({space.n_atom}, {space.n_cav}): {liouvillian.shape[0]} square")
        return liouvillian

    @classmethod
    def steady_density(cls, liouvillian: np.ndarray) -> DensityMatrix:
        """
        Stationary state from the kernel of the Liouvillian.

        One redundant population equation is replaced by the trace condition Tr rho = 1.

        Args:
            liouvillian (np.ndarray): Superoperator from build_liouvillian.

        Returns:
            DensityMatrix: Normalised, Hermitian stationary state.

        Raises:
            DegenerateKernelError: If the kernel is not one-dimensional (zero damping or a
                cutoff pathology).
        """
        dim = int(round(math.sqrt(liouvillian.shape[0])))
        bordered = liouvillian.copy()
        bordered[0, :] = _vec(np.eye(dim, dtype=complex))
        rhs = np.zeros(dim * dim, dtype=complex)
        rhs[0] = 1.0
        try:
            solution = cls._solve(bordered, rhs, label="stationary state", overwrite=True)
        except NumericalFailure as e:
            cls.LOGGER.error(f"Liouvillian kernel is degenerate: {e}")
            raise DegenerateKernelError(f"degenerate Liouvillian kernel: {e}") from e

        rho = _unvec(solution, dim)
        residual = float(np.linalg.norm(liouvillian @ solution))
        if residual > 1e-8:
            cls.LOGGER.error(f"Stationary state does not solve L rho = 0 (residual {residual:.3e})")
            raise DegenerateKernelError(f"stationary residual {residual:.3e}")

        hermiticity = float(np.linalg.norm(rho - rho.conj().T))
        if hermiticity > DensityMatrix.HERMITIAN_TOLERANCE:
            cls.LOGGER.warning(f"Stationary state Hermiticity residual {hermiticity:.3e} before symmetrisation")
        rho = 0.5 * (rho + rho.conj().T)
        density = DensityMatrix(rho / np.trace(rho).real)

        problems = density.violations()
        if problems:
            cls.LOGGER.warning(f"Stationary state invariants: {problems}")
        return density

    @classmethod
    def regression_diffusion(cls, scene: SceneConfig, r=None, axis=None, space: TruncatedSpace | None = None) -> OracleDiffusion:
        """
        Force-fluctuation diffusion 2D = 2Re int_0^inf <dF(tau) dF(0)> dtau by quantum regression.

        The integral int_0^inf exp(L tau) Y dtau = -L^-1 Y on traceless Y is computed by
        solving (L - |rho_ss>><<1|) X = -Y, which removes the kernel. Both operator
        orderings are integrated; their sum is the symmetric, real diffusion.

        Args:
            scene (SceneConfig): The scene.
            r: Position; the scene default when omitted.
            axis: Unit axis; the scene default when omitted.
            space (TruncatedSpace | None): Cutoffs; TruncatedSpace() by default.

        Returns:
            OracleDiffusion: Force diffusion, means and state diagnostics.

        Raises:
            NumericalFailure: If the deflated system is ill-conditioned, or the symmetrised
                integral has a non-negligible imaginary part.
        """
        space = space or TruncatedSpace()
        r = scene.resolve_position(r)
        dim = space.dim
        liouvillian = cls.build_liouvillian(scene, r, space)
        density = cls.steady_density(liouvillian)
        rho = density.rho

        force = cls.force_operator(scene, r, axis, space)
        delta_force = force - density.expect(force) * space.identity

        # deflate: L - vec(rho) vec(1)^T, where vec(1) is non-zero only on the diagonal slots
        diagonal_slots = np.arange(dim) * (dim + 1)
        liouvillian[:, diagonal_slots] -= _vec(rho)[:, None]
        factors = cls._lu_factor(liouvillian, label="deflated Liouvillian")

        rhs = np.stack([-_vec(delta_force @ rho), -_vec(rho @ delta_force)], axis=1)
        solutions = cls._lu_solve(factors, rhs)
        forward = complex(np.trace(delta_force @ _unvec(solutions[:, 0], dim)))
        backward = complex(np.trace(delta_force @ _unvec(solutions[:, 1], dim)))
        symmetric = forward + backward

        scale = max(abs(symmetric.real), cls.RELATIVE_FLOOR)
        imag_residual = abs(symmetric.imag) / scale
        if imag_residual > cls.IMAG_TOLERANCE and abs(symmetric.imag) > cls.IMAG_TOLERANCE:
            cls.LOGGER.error(f"Regression integral is not real: imaginary residual {imag_residual:.3e}")
            raise NumericalFailure(f"regression integral imaginary residual {imag_residual:.3e}")

        sigma_mean = density.expect(space.sigma)
        a_mean = density.expect(space.a)
        P_e = density.expect(space.sigma.conj().T @ space.sigma).real
        N_cav = density.expect(space.a.conj().T @ space.a).real
        params = scene.params
        result = OracleDiffusion(
            two_D_force=float(symmetric.real),
            imag_residual=float(imag_residual),
            two_D_spont=(params.hbar * params.k) ** 2 * 2.0 * params.gamma * P_e,
            sigma_mean=sigma_mean,
            a_mean=a_mean,
            P_e=P_e,
            N_cav=N_cav,
            purity=density.purity,
            harmonic_residual=P_e - abs(sigma_mean) ** 2,
            density=density,
        )
        cls.LOGGER.info(
            f"Oracle diffusion {result.two_D_force:.6e} (P_e={P_e:.3e}, N_cav={N_cav:.3e}, "
            f"harmonic residual {result.harmonic_residual:.2e})"
        )
        return result
