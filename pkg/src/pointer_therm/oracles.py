"""Independent solvers that bound-check the hierarchy engine.

Three oracles:

* a secular weak-coupling (Born-Markov) master equation whose rates come from
  the full Fourier transform of the bath correlation function, including the
  Lamb-shift frequency renormalization (needed for transient agreement),
* an exact finite-mode bath: unitary evolution of qubit x truncated Fock
  modes discretized from the Drude-Lorentz density, reduced by partial trace,
* an index-naive nested-loop evaluation of the hierarchy right-hand side.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import eigsh

from .bath import BathParams, KernelExpansion, spectral_density
from .errors import InvalidStateError, ModelConstructionError, ParameterError
from .heom import apply_G, apply_S_minus, hierarchy_indices, hierarchy_size
from .qubit import (PAULIS, SIGMA_Z, pointer_basis, validate_density)
from .trajectory import TrajectoryRecord

SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)

DIMENSION_BOUND = 2 ** 14


def bose_occupation(omega: float, beta: float) -> float:
    return 1.0 / math.expm1(beta * omega)


def correlation_halfline_transform(omega: float, p: BathParams, K: int = 200_000) -> complex:
    """Phi(w) = int_0^inf C(tau) e^(i w tau) dtau from the Matsubara series.

    Re Phi(w) = J(w)(nbar(w)+1) for w > 0; Im Phi supplies the Lamb shift.
    """
    cot = 1.0 / math.tan(0.5 * p.beta * p.gamma)
    out = p.lam * p.gamma * (cot - 1j) / (p.gamma - 1j * omega)
    k = np.arange(1, K + 1)
    nu = 2.0 * np.pi * k / p.beta
    coeff = (4.0 * p.lam * p.gamma / p.beta) * nu / (nu**2 - p.gamma**2)
    out += np.sum(coeff / (nu - 1j * omega))
    return complex(out)


@dataclass
class LindbladModel:
    """Secular weak-coupling generator for H_S = (omega0/2) sigma_z."""

    h_eff: np.ndarray
    rate_down: float
    rate_up: float
    rate_dephasing: float
    params: BathParams
    coupling: tuple
    omega0: float

    def liouvillian(self) -> np.ndarray:
        """4x4 generator acting on row-major vec(rho)."""
        eye = np.eye(2, dtype=complex)
        h = self.h_eff
        l_mat = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        for rate, op in self.jump_terms():
            opc = op.conj()
            l_mat += rate * (np.kron(op, opc)
                             - 0.5 * np.kron(op.conj().T @ op, eye)
                             - 0.5 * np.kron(eye, (op.conj().T @ op).T))
        return l_mat

    def jump_terms(self):
        return ((self.rate_down, SIGMA_MINUS), (self.rate_up, SIGMA_PLUS),
                (self.rate_dephasing, SIGMA_Z))


def build_lindblad_model(p: BathParams, coupling, omega0: float = 1.0,
                         lamb_shift: bool = True) -> LindbladModel:
    """Construct the weak-coupling model from J(omega0) and the Bose occupation.

    Downward/upward rates are Gamma(omega) = 2 J(omega)(nbar+1) / 2 J(omega) nbar
    times the sigma-/sigma+ weight of X in the energy eigenbasis; the pure
    dephasing rate is the omega -> 0 limit 4*lam/(beta*gamma) times a_z^2.
    """
    ax, ay, az = (float(c) for c in coupling)
    if p.lam > 0.1:
        warnings.warn("Born-Markov oracle invoked at lam > 0.1; weak-coupling "
                      "validity is doubtful", stacklevel=2)
    nbar = bose_occupation(omega0, p.beta)
    j0 = spectral_density(omega0, p)
    w = ax * ax + ay * ay
    rate_down = 2.0 * j0 * (nbar + 1.0) * w
    rate_up = 2.0 * j0 * nbar * w
    rate_dephasing = (4.0 * p.lam / (p.beta * p.gamma)) * az * az
    for name, rate in (("down", rate_down), ("up", rate_up),
                       ("dephasing", rate_dephasing)):
        if rate < 0:
            raise ModelConstructionError(f"negative {name} rate {rate}")
    h_eff = 0.5 * omega0 * SIGMA_Z
    if lamb_shift and p.lam > 0:
        shift_e = correlation_halfline_transform(omega0, p).imag
        shift_g = correlation_halfline_transform(-omega0, p).imag
        # w * (S(w0)|e><e| + S(-w0)|g><g|), traceless part only
        h_eff = h_eff + 0.5 * w * (shift_e - shift_g) * SIGMA_Z
    return LindbladModel(h_eff=h_eff, rate_down=rate_down, rate_up=rate_up,
                         rate_dephasing=rate_dephasing, params=p,
                         coupling=(ax, ay, az), omega0=omega0)


def lindblad_steady_state(model: LindbladModel) -> np.ndarray:
    """Null vector of the Liouvillian, normalized to unit trace."""
    l_mat = model.liouvillian()
    _, _, vh = np.linalg.svd(l_mat)
    rho = vh[-1].conj().reshape(2, 2)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _record_from_rhos(times, rhos, coupling, metadata) -> TrajectoryRecord:
    from .heom import _entropy_of_radius_vec
    bloch = np.stack([[np.trace(r @ s).real for s in PAULIS] for r in rhos])
    trace = np.array([np.trace(r).real for r in rhos])
    entropy = _entropy_of_radius_vec(np.linalg.norm(bloch, axis=1))
    basis = pointer_basis(*coupling)
    m1 = basis.axis()
    cvec = np.array([np.vdot(basis.p1, s @ basis.p2) for s in PAULIS])
    proj = bloch @ m1
    return TrajectoryRecord(
        times=np.asarray(times, dtype=float), bloch=bloch, entropy=entropy,
        p1_diag=0.5 * (trace + proj), p2_diag=0.5 * (trace - proj),
        offdiag=0.5 * (bloch @ cvec), metadata=metadata, trace=trace)


def lindblad_evolve(rho0: np.ndarray, model: LindbladModel, t_grid) -> TrajectoryRecord:
    """Integrate the master equation on t_grid (stiffness-free 2-level system)."""
    rho0 = validate_density(rho0)
    t_grid = np.asarray(t_grid, dtype=float)
    l_mat = model.liouvillian()

    sol = solve_ivp(lambda _t, v: l_mat @ v, (t_grid[0], t_grid[-1]),
                    rho0.reshape(4).astype(complex), t_eval=t_grid,
                    method="DOP853", rtol=1e-10, atol=1e-12)
    if not sol.success:
        raise ModelConstructionError(f"Lindblad integration failed: {sol.message}")
    rhos = [sol.y[:, k].reshape(2, 2) for k in range(sol.y.shape[1])]
    meta = {"lambda": model.params.lam, "gamma": model.params.gamma,
            "beta": model.params.beta, "omega0": model.omega0,
            "ax": model.coupling[0], "ay": model.coupling[1], "az": model.coupling[2],
            "solver": "lindblad"}
    return _record_from_rhos(sol.t, rhos, model.coupling, meta)


# ---------------------------------------------------------------------------
# Finite-mode bath oracle
# ---------------------------------------------------------------------------

@dataclass
class FiniteBathModel:
    """Qubit + M truncated bosonic modes discretized from the Drude density."""

    frequencies: np.ndarray
    couplings: np.ndarray
    n_max: int
    params: BathParams
    x_op: np.ndarray
    h_op: np.ndarray
    omega_cut: float
    hamiltonian: sp.csr_matrix = field(repr=False, default=None)

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    @property
    def dimension(self) -> int:
        return 2 * (self.n_max + 1) ** self.n_modes


def build_finite_bath(p: BathParams, n_modes: int, n_max: int, x_op: np.ndarray,
                      h_op: np.ndarray, omega_cut: float | None = None) -> FiniteBathModel:
    """Equal spectral-weight partition of [0, omega_cut] (default 4*gamma).

    Mode j sits at the median frequency of its bin; every mode carries weight
    nu_j^2 = (1/pi) * Int J / M, reproducing the [0, omega_cut] sum rule exactly.
    """
    if omega_cut is None:
        omega_cut = 4.0 * p.gamma
    dim = 2 * (n_max + 1) ** n_modes
    if dim > DIMENSION_BOUND:
        raise ParameterError(f"composite dimension {dim} exceeds bound {DIMENSION_BOUND}")
    total = p.lam * p.gamma * math.log1p((omega_cut / p.gamma) ** 2)
    qs = (np.arange(n_modes) + 0.5) / n_modes
    freqs = p.gamma * np.sqrt(np.expm1(qs * total / (p.lam * p.gamma)))
    nu = np.full(n_modes, math.sqrt(total / (np.pi * n_modes)))

    q = n_max + 1
    a_single = sp.diags(np.sqrt(np.arange(1, q)), 1, format="csr", dtype=complex)
    num_single = sp.diags(np.arange(q, dtype=float), 0, format="csr", dtype=complex)
    eye_mode = sp.identity(q, format="csr", dtype=complex)
    eye_sys = sp.identity(2, format="csr", dtype=complex)

    def embed(op, j):
        mats = [op if k == j else eye_mode for k in range(n_modes)]
        out = mats[0]
        for m in mats[1:]:
            out = sp.kron(out, m, format="csr")
        return out

    bath_dim = q ** n_modes
    h_bath = sp.csr_matrix((bath_dim, bath_dim), dtype=complex)
    y_bath = sp.csr_matrix((bath_dim, bath_dim), dtype=complex)
    for j in range(n_modes):
        h_bath = h_bath + freqs[j] * embed(num_single, j)
        disp = a_single + a_single.conj().T
        y_bath = y_bath + nu[j] * embed(disp, j)
    eye_bath = sp.identity(bath_dim, format="csr", dtype=complex)
    h_total = (sp.kron(sp.csr_matrix(h_op), eye_bath, format="csr")
               + sp.kron(eye_sys, h_bath, format="csr")
               + sp.kron(sp.csr_matrix(x_op), y_bath, format="csr"))
    return FiniteBathModel(frequencies=freqs, couplings=nu, n_max=n_max, params=p,
                           x_op=np.asarray(x_op, dtype=complex),
                           h_op=np.asarray(h_op, dtype=complex),
                           omega_cut=float(omega_cut), hamiltonian=h_total.tocsr())


def thermal_mode_weights(model: FiniteBathModel) -> list[np.ndarray]:
    """Truncated-Fock thermal populations per mode at the bath temperature."""
    out = []
    for w in model.frequencies:
        p = np.exp(-model.params.beta * w * np.arange(model.n_max + 1))
        out.append(p / p.sum())
    return out


def _chebyshev_step(h_csr, psi, dt, e_min, e_max, tol=1e-13):
    """e^(-i H dt) psi via a Chebyshev expansion on [e_min, e_max].

    Uses e^(-i a x) = sum_k (2 - delta_k0)(-i)^k J_k(a) T_k(x) with the
    spectrum mapped onto [-1, 1]; the Bessel coefficients fall off sharply
    once k exceeds a, so the series is truncated at the tolerance.
    """
    from scipy.special import jv
    half_span = 0.5 * (e_max - e_min) * 1.02 + 1e-12
    center = 0.5 * (e_max + e_min)
    a = half_span * abs(dt)
    order = int(a + 40 + 12 * a ** (1 / 3))
    bessel = jv(np.arange(order + 1), half_span * dt)
    t_prev = psi
    t_cur = (h_csr @ psi - center * psi) / half_span
    acc = bessel[0] * t_prev + 2.0 * (-1j) * bessel[1] * t_cur
    for k in range(2, order + 1):
        t_next = 2.0 * ((h_csr @ t_cur) - center * t_cur) / half_span - t_prev
        t_prev, t_cur = t_cur, t_next
        acc = acc + (2.0 * (-1j) ** k * bessel[k]) * t_cur
        if k > a and abs(bessel[k]) < tol:
            break
    return np.exp(-1j * center * dt) * acc


@dataclass
class FiniteBathResult:
    record: TrajectoryRecord
    energy: np.ndarray
    coverage: float
    n_states: int


def finite_bath_evolve(rho0: np.ndarray, model: FiniteBathModel, t_grid,
                       coverage: float = 0.999) -> FiniteBathResult:
    """Exact unitary evolution from rho0 x thermal(modes), reduced by partial trace.

    The thermal bath density is expanded in its Fock eigenbasis; configurations
    are kept by descending weight until `coverage` of the mixture is reached
    (weights renormalized), and all retained pure states are propagated in one
    Chebyshev batch.
    """
    rho0 = validate_density(rho0)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ParameterError("t_grid must be strictly increasing")
    h_csr = model.hamiltonian
    n_modes, q = model.n_modes, model.n_max + 1
    bath_dim = q ** n_modes

    evals_sys, vecs_sys = np.linalg.eigh(rho0)
    mode_weights = thermal_mode_weights(model)
    bath_probs = mode_weights[0]
    for w in mode_weights[1:]:
        bath_probs = np.multiply.outer(bath_probs, w).ravel()
    order = np.argsort(bath_probs)[::-1]
    cum = np.cumsum(bath_probs[order])
    keep = min(len(cum), int(np.searchsorted(cum, min(coverage, 1.0))) + 1)
    kept_idx = order[:keep]
    kept_mass = float(cum[keep - 1])

    weights = []
    columns = []
    for s in range(2):
        if evals_sys[s] < 1e-14:
            continue
        for b in kept_idx:
            weights.append(evals_sys[s] * bath_probs[b] / kept_mass)
            columns.append((s, b))
    weights = np.array(weights)
    psi = np.zeros((2 * bath_dim, len(columns)), dtype=complex)
    for col, (s, b) in enumerate(columns):
        ket_sys = vecs_sys[:, s]
        psi[b, col] = ket_sys[0]
        psi[bath_dim + b, col] = ket_sys[1]

    e_max = float(eigsh(h_csr, k=1, which="LA", return_eigenvectors=False,
                        tol=1e-4, maxiter=5000)[0])
    e_min = float(eigsh(h_csr, k=1, which="SA", return_eigenvectors=False,
                        tol=1e-4, maxiter=5000)[0])

    rhos = []
    energy = []

    def reduce_state(mat):
        blocks = mat.reshape(2, bath_dim, -1)
        rho = np.einsum("ank,bnk,k->ab", blocks, blocks.conj(), weights)
        return 0.5 * (rho + rho.conj().T)

    def mean_energy(mat):
        return float(np.real(np.einsum("nk,nk,k->", mat.conj(), h_csr @ mat, weights)))

    t_prev = t_grid[0]
    if t_prev != 0.0:
        psi = _chebyshev_step(h_csr, psi, t_prev, e_min, e_max)
    rhos.append(reduce_state(psi))
    energy.append(mean_energy(psi))
    for t in t_grid[1:]:
        psi = _chebyshev_step(h_csr, psi, t - t_prev, e_min, e_max)
        t_prev = t
        rhos.append(reduce_state(psi))
        energy.append(mean_energy(psi))

    from .qubit import pauli_coefficients
    coeffs = pauli_coefficients(model.x_op)
    meta = {"lambda": model.params.lam, "gamma": model.params.gamma,
            "beta": model.params.beta, "omega0": 1.0,
            "ax": float(coeffs[0]), "ay": float(coeffs[1]), "az": float(coeffs[2]),
            "solver": "finite-bath", "n_modes": n_modes, "n_max": model.n_max}
    record = _record_from_rhos(t_grid, rhos, tuple(coeffs), meta)
    return FiniteBathResult(record=record, energy=np.array(energy),
                            coverage=kept_mass, n_states=len(columns))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    diff = np.asarray(rho, dtype=complex) - np.asarray(sigma, dtype=complex)
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


# ---------------------------------------------------------------------------
# Index-naive hierarchy right-hand side (brute-force reference)
# ---------------------------------------------------------------------------

def naive_hierarchy_derivative(ados: np.ndarray, e: KernelExpansion,
                               x_op: np.ndarray, h_op: np.ndarray) -> np.ndarray:
    """Literal nested-loop HEOM right-hand side on a complex operator stack.

    No layout tricks, no hermiticity assumption: the production engine must
    agree with this to near machine precision.
    """
    ados = np.asarray(ados, dtype=complex)
    n = ados.shape[0]
    depth = int(round((math.sqrt(1 + 8 * n) - 3) / 2))
    if hierarchy_size(depth) != n:
        raise ParameterError("stack size is not a full hierarchy")
    pairs = hierarchy_indices(depth)
    lookup = {pair: i for i, pair in enumerate(pairs)}
    lam = e.params.lam
    zero = np.zeros((2, 2), dtype=complex)

    def get(n1, n2):
        i = lookup.get((n1, n2))
        return ados[i] if i is not None else zero

    out = np.zeros_like(ados)
    for i, (n1, n2) in enumerate(pairs):
        z = ados[i]
        d = -1j * (h_op @ z - z @ h_op)
        d = d - (e.gamma1 * n1 + e.gamma2 * n2) * z
        d = d - lam * e.c0 * apply_S_minus(apply_S_minus(z, x_op), x_op)
        if n1 > 0:
            d = d - 1j * n1 * apply_G(1, get(n1 - 1, n2), e, x_op)
        if n2 > 0:
            d = d - 1j * n2 * apply_G(2, get(n1, n2 - 1), e, x_op)
        d = d - 1j * lam * apply_S_minus(get(n1 + 1, n2) + get(n1, n2 + 1), x_op)
        out[i] = d
    return out
