"""Two-index auxiliary-operator hierarchy and its fixed-step RK4 integration.

The hierarchy couples operators zeta_{n1,n2} (n1+n2 <= d) through

    d/dt zeta = -i[H, zeta] - (g1*n1 + g2*n2) zeta - lam*c0*S-S- zeta
                - i n1 G1 zeta_{n1-1,n2} - i n2 G2 zeta_{n1,n2-1}
                - i lam S- (zeta_{n1+1,n2} + zeta_{n1,n2+1}),

with S-(A) = [X, A], S+(A) = {X, A}, G_j = Re(c_j) S- + i Im(c_j) S+, and
closure by zeroing operators beyond depth d.  Every term maps hermitian
stacks to hermitian stacks, so the production state stores each operator as
four real coordinates (rho00, rho11, Re rho01, Im rho01); see _kernels.

Raw hierarchy variables are catastrophically ill-conditioned (the down
coupling n1*|c1| against the up coupling lam makes deep operators grow like
|c1|^n sqrt(n!)), so the integrator works in the exactly equivalent rescaled
variables zeta~ = zeta / (s1^n1 s2^n2 sqrt(n1! n2!)) with s_j = sqrt(|c_j|/lam)
(a diagonal similarity: identical top-level dynamics and spectrum, bounded
auxiliaries).  The public accessors convert back to raw variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .bath import KernelExpansion
from .errors import InvalidStateError, NumericalBlowupError, ParameterError
from .qubit import (pauli_coefficients, pointer_basis_from_operator,
                    validate_density)
from .trajectory import TrajectoryRecord

FROBENIUS_GUARD = 1e6


def _lgamma_vec(n: np.ndarray) -> np.ndarray:
    return np.array([math.lgamma(float(v)) for v in n])


_HERM_BASIS = (
    np.array([[1, 0], [0, 0]], dtype=complex),
    np.array([[0, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, 1j], [-1j, 0]], dtype=complex),
)


def hierarchy_indices(depth: int):
    """(n1, n2) pairs with n1+n2 <= depth, ordered by level then n1."""
    return [(n1, level - n1) for level in range(depth + 1) for n1 in range(level + 1)]


def hierarchy_size(depth: int) -> int:
    return (depth + 1) * (depth + 2) // 2


def apply_S_minus(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Commutator super-operator S-(A) = X A - A X."""
    return x @ a - a @ x


def apply_S_plus(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Anticommutator super-operator S+(A) = X A + A X."""
    return x @ a + a @ x


def apply_G(j: int, a: np.ndarray, e: KernelExpansion, x: np.ndarray) -> np.ndarray:
    """G_j(A) = Re(c_j) S-(A) + i Im(c_j) S+(A); c2 is real so G_2 = c2 S-."""
    if j == 1:
        c = complex(e.c1)
    elif j == 2:
        c = complex(e.c2)
    else:
        raise ParameterError("j must be 1 or 2")
    return c.real * apply_S_minus(a, x) + 1j * c.imag * apply_S_plus(a, x)


def _coords(m: np.ndarray) -> np.ndarray:
    return np.array([m[0, 0].real, m[1, 1].real, m[0, 1].real, m[0, 1].imag])


def _from_coords(w) -> np.ndarray:
    return np.array([[w[0], w[2] + 1j * w[3]], [w[2] - 1j * w[3], w[1]]], dtype=complex)


def _real_superop(fn) -> np.ndarray:
    """Real 4x4 matrix of a superoperator that preserves hermiticity."""
    cols = []
    for b in _HERM_BASIS:
        image = fn(b)
        if np.abs(image - image.conj().T).max() > 1e-12:
            raise ParameterError("superoperator does not preserve hermiticity")
        cols.append(_coords(image))
    return np.array(cols).T.copy()


def operator_norm(op: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh(np.asarray(op, dtype=complex))).max())


def stability_dt(e: KernelExpansion, x_op: np.ndarray, h_op: np.ndarray,
                 depth: int) -> float:
    """Conservative RK4 step bound 0.1/(g2*d + lam*(|c1|+c2+4c0)*||X||^2 + omega0)."""
    lam = e.params.lam
    xnorm2 = operator_norm(x_op) ** 2
    omega0 = 2.0 * operator_norm(h_op)
    denom = e.gamma2 * depth + lam * (abs(e.c1) + e.c2 + 4.0 * e.c0) * xnorm2 + omega0
    return 0.1 / denom


class HierarchyGenerator:
    """Precomputed index maps and real 4x4 blocks of the HEOM right-hand side."""

    def __init__(self, depth: int, e: KernelExpansion, x_op: np.ndarray,
                 h_op: np.ndarray):
        if depth < 1:
            raise ParameterError("hierarchy depth must be at least 1")
        self.depth = depth
        self.expansion = e
        self.x_op = np.asarray(x_op, dtype=complex)
        self.h_op = np.asarray(h_op, dtype=complex)
        if np.abs(self.x_op - self.x_op.conj().T).max() > 1e-12:
            raise InvalidStateError("coupling operator must be hermitian")
        if np.abs(self.h_op - self.h_op.conj().T).max() > 1e-12:
            raise InvalidStateError("Hamiltonian must be hermitian")

        self.indices = hierarchy_indices(depth)
        self.n_ops = len(self.indices)
        index_of = {pair: i for i, pair in enumerate(self.indices)}
        self.index_of = index_of
        zero = self.n_ops
        n1s = np.array([p[0] for p in self.indices], dtype=np.int64)
        n2s = np.array([p[1] for p in self.indices], dtype=np.int64)
        self.dn1 = np.array([index_of[(p[0] - 1, p[1])] if p[0] > 0 else zero
                             for p in self.indices], dtype=np.int64)
        self.dn2 = np.array([index_of[(p[0], p[1] - 1)] if p[1] > 0 else zero
                             for p in self.indices], dtype=np.int64)
        self.up1 = np.array([index_of.get((p[0] + 1, p[1]), zero)
                             for p in self.indices], dtype=np.int64)
        self.up2 = np.array([index_of.get((p[0], p[1] + 1), zero)
                             for p in self.indices], dtype=np.int64)
        self.decay = e.gamma1 * n1s + e.gamma2 * n2s

        lam = float(e.params.lam)
        if lam > 0.0:
            s1 = math.sqrt(abs(e.c1) / lam)
            s2 = math.sqrt(abs(e.c2) / lam) if e.c2 != 0.0 else 1.0
        else:
            s1 = s2 = 1.0
        self.s1, self.s2 = s1, s2
        self.wd1 = np.sqrt(n1s) / s1
        self.wd2 = np.sqrt(n2s) * (e.c2 / s2)
        self.wu1 = lam * s1 * np.sqrt(n1s + 1.0)
        self.wu2 = lam * s2 * np.sqrt(n2s + 1.0)
        # conversion factor raw = factor * scaled, kept in log form for safety
        lg = (n1s * math.log(s1) + n2s * math.log(s2)
              + 0.5 * (_lgamma_vec(n1s + 1) + _lgamma_vec(n2s + 1)))
        self.raw_factor = np.exp(lg)

        x = self.x_op
        h = self.h_op

        def base(m):
            out = -1j * (h @ m - m @ h)
            if e.c0 != 0.0 and lam != 0.0:
                out = out - lam * e.c0 * apply_S_minus(apply_S_minus(m, x), x)
            return out

        self.rb = _real_superop(base)
        self.g1 = _real_superop(lambda m: -1j * apply_G(1, m, e, x))
        self.sm = _real_superop(lambda m: -1j * apply_S_minus(m, x))
        self.lam = lam
        self.dt_stab = stability_dt(e, x_op, h_op, depth)

    def rhs_args(self):
        return (self.dn1, self.dn2, self.up1, self.up2, self.wd1, self.wd2,
                self.wu1, self.wu2, self.decay, self.rb, self.g1, self.sm)

    def apply(self, y: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        if out is None:
            out = np.empty_like(y)
        _kernels.rhs(y, out, *self.rhs_args())
        return out


class HierarchyState:
    """Dense hierarchy of (depth+1)(depth+2)/2 operators plus the simulation clock."""

    def __init__(self, gen: HierarchyGenerator, y: np.ndarray, t: float = 0.0):
        self.gen = gen
        self.y = y
        self.t = float(t)

    @property
    def depth(self) -> int:
        return self.gen.depth

    @property
    def n_operators(self) -> int:
        return self.gen.n_ops

    @property
    def expansion(self) -> KernelExpansion:
        return self.gen.expansion

    @property
    def x_op(self) -> np.ndarray:
        return self.gen.x_op

    @property
    def h_op(self) -> np.ndarray:
        return self.gen.h_op

    def copy(self) -> "HierarchyState":
        return HierarchyState(self.gen, self.y.copy(), self.t)

    def ado(self, n1: int, n2: int) -> np.ndarray:
        """Auxiliary operator zeta_{n1,n2} (raw variables) as a complex 2x2 matrix."""
        i = self.gen.index_of[(n1, n2)]
        return _from_coords(self.y[i] * self.gen.raw_factor[i])

    def ados(self) -> np.ndarray:
        """All operators (raw variables) as an (N, 2, 2) complex stack."""
        w = self.y[:-1] * self.gen.raw_factor[:, None]
        out = np.zeros((self.n_operators, 2, 2), dtype=complex)
        out[:, 0, 0] = w[:, 0]
        out[:, 1, 1] = w[:, 1]
        out[:, 0, 1] = w[:, 2] + 1j * w[:, 3]
        out[:, 1, 0] = w[:, 2] - 1j * w[:, 3]
        return out

    def rho(self) -> np.ndarray:
        return self.ado(0, 0)

    def bloch(self) -> np.ndarray:
        w = self.y[0]
        return np.array([2.0 * w[2], -2.0 * w[3], w[0] - w[1]])


def _stack_to_real(ados: np.ndarray, raw_factor: np.ndarray,
                   herm_tol: float = 1e-10) -> np.ndarray:
    ados = np.asarray(ados, dtype=complex)
    if np.abs(ados - ados.conj().transpose(0, 2, 1)).max() > herm_tol:
        raise InvalidStateError("hierarchy operators must be hermitian")
    y = np.zeros((ados.shape[0] + 1, 4), dtype=float)
    y[:-1, 0] = ados[:, 0, 0].real
    y[:-1, 1] = ados[:, 1, 1].real
    y[:-1, 2] = ados[:, 0, 1].real
    y[:-1, 3] = ados[:, 0, 1].imag
    y[:-1] /= raw_factor[:, None]
    return y


def init_hierarchy(rho0: np.ndarray, depth: int, e: KernelExpansion,
                   x_op: np.ndarray, h_op: np.ndarray) -> HierarchyState:
    """Factorized initial condition: zeta_00 = rho0, all auxiliaries zero, t = 0."""
    rho0 = validate_density(rho0)
    gen = HierarchyGenerator(depth, e, x_op, h_op)
    y = np.zeros((gen.n_ops + 1, 4), dtype=float)
    y[0] = _coords(rho0)
    return HierarchyState(gen, y)


def state_from_ados(ados: np.ndarray, e: KernelExpansion, x_op: np.ndarray,
                    h_op: np.ndarray, t: float = 0.0) -> HierarchyState:
    """Build a state from an explicit hermitian operator stack (diagnostics/tests)."""
    n = np.asarray(ados).shape[0]
    depth = int(round((math.sqrt(1 + 8 * n) - 3) / 2))
    if hierarchy_size(depth) != n:
        raise ParameterError(f"stack of {n} operators is not a full hierarchy")
    gen = HierarchyGenerator(depth, e, x_op, h_op)
    return HierarchyState(gen, _stack_to_real(ados, gen.raw_factor), t)


def _check_finite(out: np.ndarray, gen: HierarchyGenerator, t: float):
    if np.all(np.isfinite(out)):
        return
    bad = np.where(~np.isfinite(out).all(axis=1))[0]
    idx = gen.indices[int(bad[0])] if bad[0] < gen.n_ops else gen.indices[-1]
    raise NumericalBlowupError(
        f"non-finite hierarchy derivative at index {idx}, t={t}", t=t, index=idx)


def hierarchy_derivative(state: HierarchyState) -> np.ndarray:
    """Raw-variable right-hand side for every operator, as an (N, 2, 2) stack."""
    out = state.gen.apply(state.y)
    _check_finite(out, state.gen, state.t)
    w = out[:-1] * state.gen.raw_factor[:, None]
    deriv = np.zeros((state.n_operators, 2, 2), dtype=complex)
    deriv[:, 0, 0] = w[:, 0]
    deriv[:, 1, 1] = w[:, 1]
    deriv[:, 0, 1] = w[:, 2] + 1j * w[:, 3]
    deriv[:, 1, 0] = w[:, 2] - 1j * w[:, 3]
    return deriv


def eta1(state: HierarchyState) -> np.ndarray:
    """Bath moment operator lam*(zeta_10 + zeta_01 - i c0 S- zeta_00).

    Satisfies d/dt zeta_00 = -i[H, zeta_00] - i[X, eta1] exactly.
    """
    if state.depth < 1:
        raise ParameterError("eta1 requires depth >= 1")
    e = state.expansion
    z00 = state.ado(0, 0)
    z10 = state.ado(1, 0)
    z01 = state.ado(0, 1)
    return e.params.lam * (z10 + z01 - 1j * e.c0 * apply_S_minus(z00, state.x_op))


def consistency_residual(state: HierarchyState) -> float:
    """Max-abs difference between the hierarchy top row and -i[H,rho] - i[X,eta1]."""
    top = hierarchy_derivative(state)[0]
    h = state.h_op
    rho = state.ado(0, 0)
    reduced = -1j * (h @ rho - rho @ h) - 1j * apply_S_minus(eta1(state), state.x_op)
    return float(np.abs(top - reduced).max())


def step_rk4(state: HierarchyState, dt: float) -> HierarchyState:
    """One classical fixed-step RK4 update of the whole hierarchy."""
    gen = state.gen
    if dt <= 0:
        raise ParameterError("dt must be positive")
    if dt > gen.dt_stab * (1.0 + 1e-9):
        raise ParameterError(f"dt={dt} exceeds stability bound {gen.dt_stab}")
    new = state.copy()
    shape = new.y.shape
    bufs = [np.empty(shape) for _ in range(5)]
    _kernels.rk4_run(new.y, *bufs, 1, dt, *gen.rhs_args())
    new.t = state.t + dt
    _check_finite(new.y, gen, new.t)
    return new


def detect_steady(window, steady_tol: float) -> bool:
    """True iff the max pairwise Bloch distance within the window is below tol."""
    w = np.asarray(window, dtype=float)
    if w.ndim != 2 or w.shape[1] != 3 or w.shape[0] < 2:
        raise ParameterError("window must hold at least two Bloch vectors")
    spans = w.max(axis=0) - w.min(axis=0)
    if float(np.linalg.norm(spans)) < steady_tol:      # diameter <= bbox diagonal
        return True
    if float(spans.max()) >= steady_tol:               # diameter >= largest span
        return False
    best = 0.0
    for i in range(0, w.shape[0], 256):
        d2 = ((w[i:i + 256, None, :] - w[None, :, :]) ** 2).sum(axis=2)
        best = max(best, float(d2.max()))
    return math.sqrt(best) < steady_tol


@dataclass
class IntegratorConfig:
    """Fixed-step integration settings.

    dt=None picks min(1e-3, stability bound); record_every=None records every
    ~0.01 time units; steady_tol=None (or 0) disables steady detection.
    """

    dt: float | None = None
    t_max: float = 500.0
    record_every: int | None = None
    steady_tol: float | None = 1e-6
    steady_window: int = 2000

    def __post_init__(self):
        if self.t_max <= 0:
            raise ParameterError("t_max must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ParameterError("dt must be positive")
        if self.record_every is not None and self.record_every < 1:
            raise ParameterError("record_every must be >= 1")
        if self.steady_window < 2:
            raise ParameterError("steady_window must be >= 2")


def _resolve_steps(cfg: IntegratorConfig, gen: HierarchyGenerator):
    dt = cfg.dt if cfg.dt is not None else min(1e-3, gen.dt_stab)
    if dt > gen.dt_stab * (1.0 + 1e-9):
        raise ParameterError(f"dt={dt} exceeds stability bound {gen.dt_stab:g}")
    record_every = cfg.record_every or max(1, round(0.01 / dt))
    nsteps = max(1, math.ceil(cfg.t_max / dt - 1e-9))
    return dt, record_every, nsteps


def _blowup_scan(y: np.ndarray, gen: HierarchyGenerator, t: float, partial):
    m = float(np.max(np.abs(y)))
    if np.isfinite(m) and m <= 0.5 * FROBENIUS_GUARD:
        return
    w = y[:-1]
    fnorm2 = w[:, 0] ** 2 + w[:, 1] ** 2 + 2.0 * (w[:, 2] ** 2 + w[:, 3] ** 2)
    if not np.all(np.isfinite(fnorm2)):
        idx = int(np.where(~np.isfinite(fnorm2))[0][0])
        raise NumericalBlowupError(
            f"non-finite hierarchy entry at index {gen.indices[idx]}, t={t}",
            t=t, index=gen.indices[idx], partial=partial())
    idx = int(np.argmax(fnorm2))
    if fnorm2[idx] > FROBENIUS_GUARD ** 2:
        raise NumericalBlowupError(
            f"auxiliary norm {math.sqrt(fnorm2[idx]):.3g} exceeds guard at index "
            f"{gen.indices[idx]}, t={t}", t=t, index=gen.indices[idx], partial=partial())


def _entropy_of_radius_vec(r: np.ndarray) -> np.ndarray:
    r = np.clip(r, 0.0, 1.0)
    out = np.full(r.shape, np.log(2.0))
    pos = r > 0
    out[pos] -= 0.5 * (1.0 + r[pos]) * np.log1p(r[pos])
    sub = pos & (r < 1.0)
    out[sub] -= 0.5 * (1.0 - r[sub]) * np.log1p(-r[sub])
    out[r >= 1.0] = 0.0
    return out


def _assemble_record(gen: HierarchyGenerator, rows: np.ndarray, cfg, dt, record_every,
                     steady: bool, steady_time, steady_bloch) -> TrajectoryRecord:
    t = rows[:, 0]
    a, d, u, v = rows[:, 1], rows[:, 2], rows[:, 3], rows[:, 4]
    bloch = np.column_stack([2.0 * u, -2.0 * v, a - d])
    trace = a + d
    entropy = _entropy_of_radius_vec(np.linalg.norm(bloch, axis=1))
    basis = pointer_basis_from_operator(gen.x_op)
    m1 = basis.axis()
    cvec = np.array([np.vdot(basis.p1, s @ basis.p2)
                     for s in _pauli_stack()], dtype=complex)
    proj = bloch @ m1
    p1d = 0.5 * (trace + proj)
    p2d = 0.5 * (trace - proj)
    off = 0.5 * (bloch @ cvec)
    coeffs = pauli_coefficients(gen.x_op)
    meta = {
        "lambda": gen.expansion.params.lam,
        "gamma": gen.expansion.params.gamma,
        "beta": gen.expansion.params.beta,
        "omega0": 2.0 * operator_norm(gen.h_op),
        "ax": float(coeffs[0]), "ay": float(coeffs[1]), "az": float(coeffs[2]),
        "depth": gen.depth,
        "dt": dt,
        "record_every": record_every,
        "t_max": cfg.t_max,
        "steady_tol": 0.0 if cfg.steady_tol is None else cfg.steady_tol,
        "steady_window": cfg.steady_window,
        "r0x": float(bloch[0, 0]), "r0y": float(bloch[0, 1]), "r0z": float(bloch[0, 2]),
    }
    return TrajectoryRecord(times=t, bloch=bloch, entropy=entropy, p1_diag=p1d,
                            p2_diag=p2d, offdiag=off, metadata=meta, steady=steady,
                            steady_time=steady_time, steady_bloch=steady_bloch,
                            trace=trace)


def _pauli_stack():
    from .qubit import PAULIS
    return PAULIS


def evolve(state: HierarchyState, cfg: IntegratorConfig) -> TrajectoryRecord:
    """Integrate to t_max or steady detection, recording every record_every steps.

    The steady snapshot is the mean Bloch vector over the detection window.
    Raises NumericalBlowupError (with the partial trajectory attached) if any
    auxiliary norm passes the guard.
    """
    gen = state.gen
    dt, record_every, nsteps = _resolve_steps(cfg, gen)
    check_every = max(1, cfg.steady_window // 8)

    y = state.y.copy()
    bufs = [np.empty_like(y) for _ in range(5)]
    n_records = nsteps // record_every + (1 if nsteps % record_every else 0)
    rows = np.empty((n_records + 1, 5))
    rows[0] = (state.t, y[0, 0], y[0, 1], y[0, 2], y[0, 3])
    nrec = 1

    steady = False
    steady_time = None
    steady_bloch = None
    args = gen.rhs_args()
    step = 0
    while step < nsteps:
        chunk = min(record_every, nsteps - step)
        _kernels.rk4_run(y, *bufs, chunk, dt, *args)
        step += chunk
        t = state.t + step * dt
        rows[nrec] = (t, y[0, 0], y[0, 1], y[0, 2], y[0, 3])
        nrec += 1

        def partial(rows=rows, nrec=nrec):
            return _assemble_record(gen, rows[:nrec], cfg, dt, record_every,
                                    False, None, None)

        _blowup_scan(y, gen, t, partial)
        if (cfg.steady_tol and nrec >= cfg.steady_window + 1
                and (nrec - 1) % check_every == 0):
            w = rows[nrec - cfg.steady_window:nrec]
            window = np.column_stack([2.0 * w[:, 3], -2.0 * w[:, 4], w[:, 1] - w[:, 2]])
            if detect_steady(window, cfg.steady_tol):
                steady = True
                steady_time = t
                steady_bloch = window.mean(axis=0)
                break

    rec = _assemble_record(gen, rows[:nrec], cfg, dt, record_every,
                           steady, steady_time, steady_bloch)
    if not steady and nrec >= cfg.steady_window:
        # not steady: still expose the trailing-window mean as the best snapshot
        rec.steady_bloch = rec.bloch[-cfg.steady_window:].mean(axis=0)
    rec.metadata["steady"] = steady
    return rec


def convergence_check(rho0: np.ndarray, e: KernelExpansion, x_op: np.ndarray,
                      h_op: np.ndarray, depth: int, depth_prime: int,
                      cfg: IntegratorConfig | None = None) -> float:
    """Max Bloch distance over recorded times between runs at two depths.

    Both runs share the deeper run's dt and record grid; steady detection is
    disabled so the grids coincide.
    """
    if depth_prime <= depth:
        raise ParameterError("depth_prime must exceed depth")
    cfg = cfg or IntegratorConfig(t_max=50.0)
    gen_hi = HierarchyGenerator(depth_prime, e, x_op, h_op)
    dt = cfg.dt if cfg.dt is not None else min(1e-3, gen_hi.dt_stab)
    shared = IntegratorConfig(dt=dt, t_max=cfg.t_max, record_every=cfg.record_every,
                              steady_tol=None, steady_window=cfg.steady_window)
    rec_lo = evolve(init_hierarchy(rho0, depth, e, x_op, h_op), shared)
    rec_hi = evolve(init_hierarchy(rho0, depth_prime, e, x_op, h_op), shared)
    n = min(len(rec_lo), len(rec_hi))
    diff = rec_lo.bloch[:n] - rec_hi.bloch[:n]
    return float(np.linalg.norm(diff, axis=1).max())
