"""Dense complex linear algebra for 2x2 and 4x4 operators.

Everything here is tiny and fixed-size: single-qubit effects live in 2x2,
bipartite states in 4x4.  All functions are pure and operate on plain
complex numpy arrays.
"""
from __future__ import annotations

import numpy as np

HERM_TOL = 1e-10
EIG_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class NonHermitianError(ValueError):
    """Raised when a matrix expected to be Hermitian is not."""


class DegenerateFactorError(ValueError):
    """Raised when a state factor is numerically zero."""


class InvalidStateError(ValueError):
    """Raised when a 4x4 matrix fails the density-matrix invariants."""


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two complex matrices."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def hermitian_eigs(m: np.ndarray, tol: float = EIG_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as columns).  Raises
    NonHermitianError if the symmetry defect exceeds `tol`.
    """
    m = np.asarray(m, dtype=complex)
    if hermiticity_defect(m) > tol:
        raise NonHermitianError(f"symmetry defect {hermiticity_defect(m):.3e} > {tol:.1e}")
    w, v = np.linalg.eigh(m)
    return w, v


def check_density_matrix(rho: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Validate the density-matrix invariants; returns rho unchanged.

    Hermitian to `tol`, eigenvalues >= -`tol`, unit trace to `tol`.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected 4x4, got {rho.shape}")
    if hermiticity_defect(rho) > tol:
        raise InvalidStateError("not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol or abs(np.trace(rho).imag) > tol:
        raise InvalidStateError("trace != 1")
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if w.min() < -tol:
        raise InvalidStateError(f"negative eigenvalue {w.min():.3e}")
    return rho


def check_effect(e: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Validate a binary-POVM first effect: Hermitian, spectrum in [0, 1]."""
    e = np.asarray(e, dtype=complex)
    if hermiticity_defect(e) > tol:
        raise NonHermitianError("effect not Hermitian")
    w = np.linalg.eigvalsh((e + e.conj().T) / 2)
    if w.min() < -tol or w.max() > 1.0 + tol:
        raise ValueError(f"effect spectrum [{w.min():.3e}, {w.max():.3e}] outside [0,1]")
    return e


def partial_transpose_b(rho: np.ndarray) -> np.ndarray:
    """Transpose on the second tensor factor of a 4x4 bipartite operator."""
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    # indices (i, j; i', j') -> transpose j <-> j'
    return r.transpose(0, 3, 2, 1).reshape(4, 4)


def state_from_factor(g: np.ndarray) -> np.ndarray:
    """Map an arbitrary 4x4 complex factor g onto the state g g^dag / tr."""
    g = np.asarray(g, dtype=complex)
    gg = g @ g.conj().T
    tr = np.trace(gg).real
    if tr < 1e-300:
        raise DegenerateFactorError("factor has numerically zero norm")
    return gg / tr


def expm_i_herm2(h: np.ndarray) -> np.ndarray:
    """exp(iH) for a 2x2 Hermitian H, in closed form via the Pauli split."""
    h = np.asarray(h, dtype=complex)
    c0 = (h[0, 0].real + h[1, 1].real) / 2.0
    vz = (h[0, 0].real - h[1, 1].real) / 2.0
    vx = h[1, 0].real
    vy = h[1, 0].imag
    r = np.sqrt(vx * vx + vy * vy + vz * vz)
    phase = np.exp(1j * c0)
    if r < 1e-300:
        return phase * I2
    n = np.array([vx, vy, vz]) / r
    return phase * (np.cos(r) * I2 + 1j * np.sin(r) * (n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z))


def sigmoid(t: np.ndarray | float) -> np.ndarray | float:
    return 1.0 / (1.0 + np.exp(-np.asarray(t, dtype=float)))


def effect_from_params(theta: np.ndarray) -> np.ndarray:
    """Smooth chart onto binary qubit effects.

    theta = (t1, t2, h00, h11, hre, him): the effect is
    U diag(sigmoid(t1), sigmoid(t2)) U^dag with U = exp(iH) and H the 2x2
    Hermitian built from the last four reals.  Eigenvalues are strictly
    inside (0, 1) for finite theta, so Born probabilities stay positive.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (6,):
        raise ValueError(f"expected 6 parameters, got shape {theta.shape}")
    t1, t2, h00, h11, hre, him = theta
    u = expm_i_herm2(np.array([[h00, hre - 1j * him], [hre + 1j * him, h11]]))
    d = np.diag([sigmoid(t1), sigmoid(t2)]).astype(complex)
    return u @ d @ u.conj().T


def bloch_projector(n: np.ndarray) -> np.ndarray:
    """Rank-1 projector (I + n.sigma)/2 onto the +1 eigenspace along unit n."""
    n = np.asarray(n, dtype=float)
    return (I2 + n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z) / 2.0
