from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import qutip
import scipy.linalg

from utils.exceptions import SceneConfigError


def destroy(n: int) -> np.ndarray:
    """Truncated bosonic lowering operator on n Fock states."""
    return qutip.destroy(n).full()


def coherent_amplitudes(n: int, alpha: complex) -> np.ndarray:
    """Normalised Fock amplitudes of the coherent state |alpha> truncated to n states."""
    return qutip.coherent(n, alpha, method="analytic").unit().full().ravel()


@dataclass(frozen=True)
class TruncatedSpace:
    """
    Product Fock space of the harmonic atom and the cavity mode, atom first.

    Attributes:
        n_atom (int): Fock cutoff of the atomic oscillator (2 gives a two-level atom).
        n_cav (int): Fock cutoff of the cavity mode.
        max_dim (int): Largest allowed Hilbert-space dimension; the Liouvillian is max_dim^2 square.
    """
    n_atom: int = 6
    n_cav: int = 6
    max_dim: int = 64

    def __post_init__(self):
        problems = []
        if self.n_atom < 2 or self.n_cav < 2:
            problems.append(f"cutoffs must be >= 2, got ({self.n_atom}, {self.n_cav})")
        if self.n_atom * self.n_cav > self.max_dim:
            problems.append(
                f"dimension {self.n_atom * self.n_cav} exceeds the maximum {self.max_dim} "
                f"(Liouvillian {self.max_dim ** 2} square)"
            )
        if problems:
            raise SceneConfigError(problems)

    @classmethod
    def two_level(cls, n_cav: int = 6, max_dim: int = 64) -> "TruncatedSpace":
        """Space whose atomic factor is a two-level system; for saturation comparisons only."""
        return cls(n_atom=2, n_cav=n_cav, max_dim=max_dim)

    @property
    def dim(self) -> int:
        return self.n_atom * self.n_cav

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    @property
    def sigma(self) -> np.ndarray:
        """Atomic lowering operator."""
        return qutip.tensor(qutip.destroy(self.n_atom), qutip.qeye(self.n_cav)).full()

    @property
    def a(self) -> np.ndarray:
        """Cavity annihilation operator."""
        return qutip.tensor(qutip.qeye(self.n_atom), qutip.destroy(self.n_cav)).full()

    def product_state(self, alpha: complex, beta: complex) -> np.ndarray:
        """Ket |alpha>_atom (x) |beta>_cav of two truncated coherent states."""
        return np.kron(coherent_amplitudes(self.n_atom, alpha), coherent_amplitudes(self.n_cav, beta))

    def vacuum(self) -> np.ndarray:
        return self.product_state(0.0, 0.0)


@dataclass(frozen=True)
class DensityMatrix:
    """A dim x dim density matrix with its invariant checks."""
    rho: np.ndarray

    HERMITIAN_TOLERANCE = 1e-10
    TRACE_TOLERANCE = 1e-10
    EIGENVALUE_TOLERANCE = -1e-10

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    @property
    def hermiticity_residual(self) -> float:
        return float(np.linalg.norm(self.rho - self.rho.conj().T))

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho.conj().T, self.rho)))

    @property
    def min_eigenvalue(self) -> float:
        return float(scipy.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))[0])

    def expect(self, operator: np.ndarray) -> complex:
        """Tr[operator rho]."""
        return complex(np.trace(operator @ self.rho))

    def fidelity(self, ket: np.ndarray) -> float:
        """<psi|rho|psi> for a pure state psi."""
        ket = np.asarray(ket, dtype=complex)
        return float(np.real(np.vdot(ket, self.rho @ ket)))

    def violations(self) -> list[str]:
        """Every violated density-matrix invariant."""
        problems = []
        if self.hermiticity_residual > self.HERMITIAN_TOLERANCE:
            problems.append(f"not Hermitian (residual {self.hermiticity_residual:.3e})")
        if abs(self.trace - 1.0) > self.TRACE_TOLERANCE:
            problems.append(f"trace {self.trace:.12g} differs from 1")
        if self.min_eigenvalue < self.EIGENVALUE_TOLERANCE:
            problems.append(f"negative eigenvalue {self.min_eigenvalue:.3e}")
        return problems
