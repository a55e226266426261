"""Exact qubit algebra: Pauli/Bloch maps, Gibbs states, entropy, pointer bases.

Conventions: natural units (hbar = k_B = 1), energies in units of the qubit
splitting omega0, density matrices stored row-major with basis {|z+>, |z->}.
All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError, ParameterError

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10


def validate_density(rho: np.ndarray) -> np.ndarray:
    """Check hermiticity, unit trace and positivity; return rho as a complex array.

    Raises InvalidStateError when any check fails.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise InvalidStateError(f"density must be 2x2, got shape {rho.shape}")
    if not np.all(np.isfinite(rho.view(float))):
        raise InvalidStateError("density contains non-finite entries")
    if np.abs(rho[0, 1] - np.conj(rho[1, 0])) > HERMITICITY_TOL or \
            abs(rho[0, 0].imag) > HERMITICITY_TOL or abs(rho[1, 1].imag) > HERMITICITY_TOL:
        raise InvalidStateError("density is not hermitian")
    tr = rho[0, 0] + rho[1, 1]
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"density trace {tr} differs from 1")
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if evals.min() < EIGENVALUE_FLOOR:
        raise InvalidStateError(f"density has negative eigenvalue {evals.min()}")
    return rho


def density_from_bloch(r) -> np.ndarray:
    """rho = (I + r . sigma) / 2 for a Bloch vector with |r| <= 1."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ParameterError("Bloch vector must have three real components")
    norm = np.linalg.norm(r)
    if norm > 1.0 + 1e-10:
        raise InvalidStateError(f"Bloch vector norm {norm} exceeds 1")
    return 0.5 * (IDENTITY + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)


def bloch_from_density(rho: np.ndarray) -> np.ndarray:
    """Inverse Pauli decomposition, r_k = Tr(rho sigma_k)."""
    rho = validate_density(rho)
    r = np.array([np.trace(rho @ s) for s in PAULIS])
    if np.abs(r.imag).max() > HERMITICITY_TOL:
        raise InvalidStateError("Bloch components acquired an imaginary part")
    return r.real


def gibbs_state(beta: float, omega0: float = 1.0) -> np.ndarray:
    """Thermal state of H = (omega0/2) sigma_z: Bloch vector (0,0,-tanh(beta*omega0/2))."""
    if beta <= 0:
        raise ParameterError("beta must be positive")
    if omega0 <= 0:
        raise ParameterError("omega0 must be positive")
    return density_from_bloch((0.0, 0.0, -np.tanh(0.5 * beta * omega0)))


def gibbs_bloch(beta: float, omega0: float = 1.0) -> np.ndarray:
    if beta <= 0 or omega0 <= 0:
        raise ParameterError("beta and omega0 must be positive")
    return np.array([0.0, 0.0, -np.tanh(0.5 * beta * omega0)])


def entropy_from_radius(r: float) -> float:
    """Closed-form qubit entropy S(r) = ln2 - [(1+r)ln(1+r) + (1-r)ln(1-r)]/2.

    Uses the 0*ln(0) = 0 convention at r = 1; r is clamped to [0, 1] to
    absorb float round-off from upstream trace operations.
    """
    r = min(max(float(r), 0.0), 1.0)
    s = np.log(2.0)
    if r > 0.0:
        s -= 0.5 * (1.0 + r) * np.log1p(r)
        if r < 1.0:
            s -= 0.5 * (1.0 - r) * np.log1p(-r)
    return float(s)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S = -Tr(rho ln rho) by eigen-decomposition; returns a value in [0, ln 2]."""
    rho = validate_density(rho)
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    s = 0.0
    for p in evals:
        if p > 0.0:
            s -= p * np.log(p)
    return float(max(s, 0.0))


@dataclass(frozen=True)
class PointerBasis:
    """Orthonormal eigenbasis of a coupling operator X = a . sigma.

    p1 is the eigenvector of the larger eigenvalue; the global phase of each
    ket makes its largest-magnitude amplitude real positive.
    """

    p1: np.ndarray
    p2: np.ndarray
    eigenvalues: tuple

    def kets(self):
        return self.p1, self.p2

    def axis(self) -> np.ndarray:
        """Unit Bloch vector of p1 (the pointer axis)."""
        rho1 = np.outer(self.p1, self.p1.conj())
        return bloch_from_density(rho1)


def coupling_operator(ax: float, ay: float, az: float) -> np.ndarray:
    return ax * SIGMA_X + ay * SIGMA_Y + az * SIGMA_Z


def _fix_phase(ket: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(ket)))
    mag = abs(ket[k])
    if mag == 0.0:
        return ket
    return ket * (mag / ket[k])


def pointer_basis(ax: float, ay: float, az: float) -> PointerBasis:
    """Eigen-decomposition of X = ax sx + ay sy + az sz with deterministic ordering."""
    if ax == 0.0 and ay == 0.0 and az == 0.0:
        raise ParameterError("pointer basis undefined for zero coupling vector")
    x = coupling_operator(ax, ay, az)
    evals, vecs = np.linalg.eigh(x)
    # eigh returns ascending eigenvalues; p1 takes the larger one
    p1 = _fix_phase(vecs[:, 1].copy())
    p2 = _fix_phase(vecs[:, 0].copy())
    return PointerBasis(p1=p1, p2=p2, eigenvalues=(float(evals[1]), float(evals[0])))


def pointer_basis_from_operator(x: np.ndarray) -> PointerBasis:
    """Pointer basis of an arbitrary hermitian 2x2 coupling operator."""
    x = np.asarray(x, dtype=complex)
    coeffs = pauli_coefficients(x)
    if np.linalg.norm(coeffs) < 1e-14:
        raise ParameterError("pointer basis undefined for a coupling without Pauli components")
    evals, vecs = np.linalg.eigh(x)
    p1 = _fix_phase(vecs[:, 1].copy())
    p2 = _fix_phase(vecs[:, 0].copy())
    return PointerBasis(p1=p1, p2=p2, eigenvalues=(float(evals[1]), float(evals[0])))


def pauli_coefficients(op: np.ndarray) -> np.ndarray:
    """Real coefficients (ax, ay, az) of a hermitian operator's traceless part."""
    op = np.asarray(op, dtype=complex)
    return np.array([0.5 * np.trace(op @ s).real for s in PAULIS])


def pointer_project(rho: np.ndarray, basis: PointerBasis) -> np.ndarray:
    """Dephase rho in the pointer basis: sum_i |p_i><p_i| rho |p_i><p_i|."""
    rho = validate_density(rho)
    out = np.zeros((2, 2), dtype=complex)
    for p in basis.kets():
        d = np.vdot(p, rho @ p)
        out += d * np.outer(p, p.conj())
    return out


def pointer_matrix_elements(rho: np.ndarray, basis: PointerBasis):
    """Return (d1, d2, offdiag) with d_i = <p_i|rho|p_i> and offdiag = <p1|rho|p2>."""
    rho = validate_density(rho)
    p1, p2 = basis.kets()
    d1 = np.vdot(p1, rho @ p1)
    d2 = np.vdot(p2, rho @ p2)
    off = np.vdot(p1, rho @ p2)
    return float(d1.real), float(d2.real), complex(off)
