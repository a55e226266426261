"""Acceptance suite: one callable per criterion, shared by `verify` and pytest.

Every criterion runs at its stated tolerance and reports the measured value.
Expensive artifacts (the two coupling-case sweeps, the depth-convergence pair,
the oracle runs) are computed once and shared across criteria; `quick=True`
substitutes a reduced-parameter smoke suite (shallow hierarchies, short
horizons, loose thresholds) that only checks plumbing.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from .bath import BathParams, fit_kernel, validate_fit, zero_frequency_weight
from .errors import PointerThermError
from .experiments import (CASE_COUPLINGS, LAMBDA_GRID, PSI1_BLOCH, PSI2_BLOCH,
                          UNIQUENESS_BLOCHS, RunSpec, _run_many,
                          gibbs_pointer_diagonals, run_case, run_invariants,
                          run_spec)
from .heom import (HierarchyGenerator, IntegratorConfig, evolve,
                   hierarchy_size, init_hierarchy)
from .oracles import (build_finite_bath, build_lindblad_model,
                      finite_bath_evolve, lindblad_evolve,
                      naive_hierarchy_derivative)
from .qubit import (SIGMA_Z, coupling_operator, density_from_bloch,
                    entropy_from_radius, gibbs_bloch)
from .trajectory import write_sweep_csv, write_trajectory_csv

LN2 = float(np.log(2.0))


@dataclass
class CriterionResult:
    number: str
    name: str
    passed: bool
    details: str

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number}. {self.name}: {self.details}"


@dataclass
class Artifacts:
    quick: bool
    beta: float
    sweeps: dict = field(default_factory=dict)        # case -> SweepResult
    c1_records: list = field(default_factory=list)    # psi1, psi2 runs
    depth_pair: tuple = None                          # (rec_lo, rec_hi, d_lo, d_hi)
    lindblad_pair: tuple = None                       # (heom rec, lindblad rec, horizon)
    finite_bath: tuple = None                         # (heom rec, FiniteBathResult, grid)
    uniqueness: list = field(default_factory=list)    # (label, tol, [records])
    herm_drift: float = 0.0
    all_records: list = field(default_factory=list)


def _log(msg: str):
    print(f"  .. {msg}", flush=True)


def compute_artifacts(quick: bool = False, workers: int | None = None) -> Artifacts:
    beta = 2.0 / 3.0
    art = Artifacts(quick=quick, beta=beta)
    t0 = time.time()

    # quick depths avoid the shallow truncation resonances at lam=5 (d=6,7,10
    # carry growing modes; 8,9 and >=11 are clean)
    if quick:
        sweep_kw = dict(lam_list=(0.01, 5.0), depth=16, t_max=350.0,
                        steady_tol=1e-4, workers=workers)
    else:
        sweep_kw = dict(lam_list=LAMBDA_GRID, steady_tol=1e-5, workers=workers)
    for case in ("I", "II"):
        _log(f"case {case} sweep ({'quick' if quick else 'full'}) ...")
        art.sweeps[case] = run_case(CASE_COUPLINGS[case], rho0_list=(PSI1_BLOCH,),
                                    **sweep_kw)
        art.all_records.extend(art.sweeps[case].trajectories)

    # one cost-sorted batch: psi1/psi2 weak runs, the depth-50 partner run,
    # the short lambda=1 run for the finite-bath comparison, uniqueness rosters
    lam_weak = 0.01
    depth_weak = 6 if quick else 10
    t_weak = 300.0 if quick else 400.0
    d_lo, d_hi = (16, 20) if quick else (50, 60)
    p5 = BathParams(lam=5.0, gamma=1.0, beta=beta)
    e5 = fit_kernel(p5)
    x1 = coupling_operator(*CASE_COUPLINGS["I"])
    h_op = 0.5 * SIGMA_Z
    dt_hi = HierarchyGenerator(d_hi, e5, x1, h_op).dt_stab
    if quick:
        t_conv = 60.0
    else:
        t_conv = art.sweeps["I"].trajectories[-1].times[-1]

    batch = [
        RunSpec(lam=lam_weak, coupling=CASE_COUPLINGS["I"], beta=beta,
                rho0_bloch=PSI2_BLOCH, depth=depth_weak, t_max=t_weak,
                steady_tol=1e-5),
        RunSpec(lam=5.0, coupling=CASE_COUPLINGS["I"], beta=beta,
                rho0_bloch=PSI1_BLOCH, depth=d_lo, dt=dt_hi,
                t_max=t_conv, steady_tol=None),
        RunSpec(lam=1.0, coupling=CASE_COUPLINGS["I"], beta=beta,
                rho0_bloch=PSI1_BLOCH, depth=12 if quick else 30,
                t_max=1.0 if quick else 2.0, steady_tol=None),
    ]
    if quick:
        batch.append(RunSpec(lam=lam_weak, coupling=CASE_COUPLINGS["I"], beta=beta,
                             rho0_bloch=PSI1_BLOCH, depth=depth_weak,
                             t_max=t_weak, steady_tol=1e-5))
        batch.append(RunSpec(lam=5.0, coupling=CASE_COUPLINGS["I"], beta=beta,
                             rho0_bloch=PSI1_BLOCH, depth=d_hi, dt=dt_hi,
                             t_max=t_conv, steady_tol=None))
    tol1 = 1e-4 if quick else 1e-5
    tol2 = 1e-3 if quick else 1e-4
    specs1 = [RunSpec(lam=1.0, coupling=CASE_COUPLINGS["I"], beta=beta,
                      rho0_bloch=r0, depth=8 if quick else 20,
                      t_max=120.0 if quick else 212.0, steady_tol=tol1)
              for r0 in UNIQUENESS_BLOCHS]
    # slow-mode rate ~0.026 at lam=5 case II: the steady window must span
    # ~2/rate so the window mean sits well inside the 2*tol uniqueness bound
    specs2 = [RunSpec(lam=5.0, coupling=CASE_COUPLINGS["II"], beta=beta,
                      rho0_bloch=r0, depth=10 if quick else 25,
                      t_max=360.0 if quick else 460.0, steady_tol=tol2,
                      steady_window=7600)
              for r0 in UNIQUENESS_BLOCHS]
    _log(f"batch of {len(batch) + len(specs1) + len(specs2)} auxiliary runs ...")
    recs = _run_many(batch + specs1 + specs2, workers)
    psi2_rec, rec_lo, heom_short = recs[0], recs[1], recs[2]
    if quick:
        psi1_rec, rec_hi = recs[3], recs[4]
    else:
        psi1_rec = art.sweeps["I"].trajectories[0]
        rec_hi = art.sweeps["I"].trajectories[-1]   # lambda = 5, depth 60 run
    recs1 = recs[len(batch):len(batch) + len(specs1)]
    recs2 = recs[len(batch) + len(specs1):]
    art.c1_records = [psi1_rec, psi2_rec]
    art.depth_pair = (rec_lo, rec_hi, d_lo, d_hi)
    art.uniqueness = [("lambda=1 case I", tol1, recs1),
                      ("lambda=5 case II", tol2, recs2)]
    art.all_records.extend([psi2_rec, rec_lo, heom_short] + recs1 + recs2)
    if quick:
        art.all_records.extend([psi1_rec, rec_hi])

    # criterion 8a: Lindblad comparison over the first 50 time units
    _log("Lindblad oracle ...")
    horizon = 30.0 if quick else 50.0
    heom_weak = psi1_rec
    model = build_lindblad_model(BathParams(lam=lam_weak, gamma=1.0, beta=beta),
                                 CASE_COUPLINGS["I"])
    mask = heom_weak.times <= horizon + 1e-9
    lind_rec = lindblad_evolve(density_from_bloch(PSI1_BLOCH), model,
                               heom_weak.times[mask])
    art.lindblad_pair = (heom_weak, lind_rec, horizon)

    # criterion 8b: finite-bath oracle at lambda = 1
    _log("finite-bath oracle ...")
    p1 = BathParams(lam=1.0, gamma=1.0, beta=beta)
    n_modes, n_max = (3, 2) if quick else (6, 3)
    t_end = 1.0 if quick else 2.0
    fb_model = build_finite_bath(p1, n_modes, n_max, x1, h_op)
    grid = np.round(np.arange(0.0, t_end + 1e-9, 0.1), 10)
    fb_res = finite_bath_evolve(density_from_bloch(PSI1_BLOCH), fb_model, grid,
                                coverage=0.995 if quick else 0.999)
    art.finite_bath = (heom_short, fb_res, grid)

    # hermiticity cross-check: integrate the naive complex-matrix hierarchy
    _log("complex-path hermiticity cross-check ...")
    art.herm_drift = _hermiticity_cross_check(beta)

    _log(f"artifacts ready in {time.time() - t0:.1f}s")
    return art


def _hermiticity_cross_check(beta: float, depth: int = 4, steps: int = 400,
                             dt: float = 1e-3) -> float:
    """RK4 on the raw complex-matrix hierarchy; returns max hermiticity drift
    of the top operator, and checks agreement with the production engine."""
    p = BathParams(lam=1.0, gamma=1.0, beta=beta)
    e = fit_kernel(p)
    x_op = coupling_operator(*CASE_COUPLINGS["I"])
    h_op = 0.5 * SIGMA_Z
    n = hierarchy_size(depth)
    ados = np.zeros((n, 2, 2), dtype=complex)
    ados[0] = density_from_bloch(PSI1_BLOCH)

    state = init_hierarchy(density_from_bloch(PSI1_BLOCH), depth, e, x_op, h_op)
    cfg = IntegratorConfig(dt=dt, t_max=steps * dt, record_every=1, steady_tol=None)
    rec = evolve(state, cfg)

    drift = 0.0
    for _ in range(steps):
        k1 = naive_hierarchy_derivative(ados, e, x_op, h_op)
        k2 = naive_hierarchy_derivative(ados + 0.5 * dt * k1, e, x_op, h_op)
        k3 = naive_hierarchy_derivative(ados + 0.5 * dt * k2, e, x_op, h_op)
        k4 = naive_hierarchy_derivative(ados + dt * k3, e, x_op, h_op)
        ados = ados + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        drift = max(drift, float(np.abs(ados[0] - ados[0].conj().T).max()))
    top = ados[0]
    r_naive = np.array([2 * top[0, 1].real, -2 * top[0, 1].imag,
                        (top[0, 0] - top[1, 1]).real])
    gap = float(np.linalg.norm(r_naive - rec.bloch[-1]))
    return max(drift, gap)


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def criterion_1(art: Artifacts) -> CriterionResult:
    bound = 0.10 if art.quick else 0.02
    target = gibbs_bloch(art.beta)
    worst = max(float(np.linalg.norm(rec.snapshot_bloch() - target))
                for rec in art.c1_records)
    wall = max(rec.metadata.get("wall_seconds", 0.0) for rec in art.c1_records)
    passed = worst < bound and wall <= 300.0
    return CriterionResult(
        "1", "weak-coupling Gibbs recovery (psi1, psi2)",
        passed, f"max |r* - r_G| = {worst:.4g} (bound {bound:g}); "
        f"runtime {wall:.0f}s (target 300s)")


def criterion_2(art: Artifacts) -> CriterionResult:
    r_bound, d_bound = (0.12, 0.05) if art.quick else (0.05, 0.01)
    sweep = art.sweeps["I"]
    idx = int(np.argmin(np.abs(sweep.lambdas - 5.0)))
    radius = float(np.linalg.norm(sweep.steady_bloch[idx]))
    d_dev = max(abs(sweep.p1_diag[idx] - 0.5), abs(sweep.p2_diag[idx] - 0.5))
    wall = sweep.trajectories[idx].metadata.get("wall_seconds", 0.0)
    passed = radius < r_bound and d_dev <= d_bound and wall <= 900.0
    return CriterionResult(
        "2", "strong-coupling pointer limit, case I (lambda=5)",
        passed,
        f"|r*| = {radius:.4f} (bound {r_bound:g}); max |d_i - 0.5| = {d_dev:.4g} "
        f"(bound {d_bound:g}); runtime {wall:.0f}s (bound 900s)")


def criterion_3(art: Artifacts) -> CriterionResult:
    bound = 0.05 if art.quick else 0.02
    worst = 0.0
    details = []
    for case, sweep in art.sweeps.items():
        d1g, d2g = gibbs_pointer_diagonals(CASE_COUPLINGS[case], art.beta)
        dev = max(float(np.abs(sweep.p1_diag - d1g).max()),
                  float(np.abs(sweep.p2_diag - d2g).max()))
        details.append(f"case {case}: {dev:.4g}")
        worst = max(worst, dev)
    return CriterionResult(
        "3", "postulate 2: pointer diagonals pinned to Gibbs values",
        worst < bound, f"max |d_i - d_i^G| = {worst:.4g} (bound {bound:g}; "
        + ", ".join(details) + ")")


def criterion_4(art: Artifacts) -> CriterionResult:
    line_bound = 0.05 if art.quick else 0.02
    slack = 1e-3
    sweep = art.sweeps["II"]
    worst_line = float(sweep.line_distance.max())
    increases = np.diff(sweep.offdiag_abs)
    worst_increase = float(increases.max()) if len(increases) else 0.0
    passed = worst_line < line_bound and worst_increase <= slack
    return CriterionResult(
        "4", "projection-line geometry, case II",
        passed,
        f"max distance to segment G-P = {worst_line:.4g} (bound {line_bound:g}); "
        f"max offdiag increase = {worst_increase:.3g} (slack {slack:g})")


def criterion_5(art: Artifacts) -> CriterionResult:
    slack = 1e-3
    ln2_bound = 0.03 if art.quick else 0.01
    s_pointer_2 = entropy_from_radius(np.tanh(art.beta / 2.0 * 1.0) / np.sqrt(2.0))
    msgs = []
    ok = True
    for case, sweep in art.sweeps.items():
        drops = -np.diff(sweep.entropy)
        worst_drop = float(drops.max()) if len(drops) else 0.0
        ok &= worst_drop <= slack
        msgs.append(f"case {case} max entropy drop {worst_drop:.3g}")
    s_final = float(art.sweeps["I"].entropy[-1])
    ok &= abs(s_final - LN2) < ln2_bound
    msgs.append(f"case I S(lam=5) = {s_final:.5f} vs ln2 = {LN2:.5f}")
    excess = float((art.sweeps["II"].entropy - (s_pointer_2 + slack)).max())
    ok &= excess <= 0.0
    msgs.append(f"case II max S - (S_P + 1e-3) = {excess:.3g} (S_P = {s_pointer_2:.5f})")
    return CriterionResult("5", "entropy increase toward the pointer limits",
                           bool(ok), "; ".join(msgs))


def criterion_6(art: Artifacts) -> CriterionResult:
    p = BathParams(lam=1.0, gamma=1.0, beta=art.beta)
    e = fit_kernel(p)
    grid = np.linspace(3.0 * art.beta, 10.0, 200)
    err = validate_fit(e, grid, K=50)
    weight_err = abs(zero_frequency_weight(e) - 2.0 * p.lam / (p.beta * p.gamma))
    passed = err < 1e-6 and weight_err < 1e-10
    return CriterionResult(
        "6", "kernel-fit quality and terminator weight identity",
        passed, f"max relative error = {err:.3g} (bound 1e-6); "
        f"zero-frequency weight mismatch = {weight_err:.3g} (bound 1e-10)")


def criterion_7(art: Artifacts) -> CriterionResult:
    bound = 0.05 if art.quick else 1e-4
    rec_lo, rec_hi, d_lo, d_hi = art.depth_pair
    n = min(len(rec_lo), len(rec_hi))
    dist = float(np.linalg.norm(rec_lo.bloch[:n] - rec_hi.bloch[:n], axis=1).max())
    return CriterionResult(
        "7", f"depth convergence d={d_lo} vs d={d_hi} at lambda=5",
        dist < bound, f"max Bloch distance = {dist:.3g} (bound {bound:g})")


def criterion_8(art: Artifacts) -> CriterionResult:
    bound_a = 0.08 if art.quick else 0.02
    bound_b = 0.2 if art.quick else 0.05
    bound_c = 1e-13
    heom_rec, lind_rec, horizon = art.lindblad_pair
    n = len(lind_rec.times)
    dist_a = float(np.linalg.norm(heom_rec.bloch[:n] - lind_rec.bloch, axis=1).max())

    heom_short, fb_res, grid = art.finite_bath
    heom_b = heom_short.sample_at(grid)
    # for unit-trace qubit states the trace distance is half the Bloch distance
    dist_b = float(0.5 * np.linalg.norm(fb_res.record.bloch - heom_b, axis=1).max())

    dist_c = _brute_force_gap(art.beta)
    passed = dist_a < bound_a and dist_b < bound_b and dist_c < bound_c
    return CriterionResult(
        "8", "oracle agreement (Lindblad, finite bath, brute-force RHS)",
        passed,
        f"(a) HEOM-Lindblad max Bloch distance over t<={horizon:g}: {dist_a:.4g} "
        f"(bound {bound_a:g}); (b) HEOM-finite-bath max trace distance: {dist_b:.4g} "
        f"(bound {bound_b:g}, bath coverage {fb_res.coverage:.4f}); "
        f"(c) brute-force RHS gap: {dist_c:.3g} (bound {bound_c:g})")


def _brute_force_gap(beta: float) -> float:
    from .heom import state_from_ados, hierarchy_derivative
    rng = np.random.default_rng(2024)
    worst = 0.0
    for coupling in (CASE_COUPLINGS["I"], CASE_COUPLINGS["II"]):
        x_op = coupling_operator(*coupling)
        h_op = 0.5 * SIGMA_Z
        e = fit_kernel(BathParams(lam=1.0, gamma=1.0, beta=beta))
        for depth in (1, 2, 3):
            n = hierarchy_size(depth)
            raw = rng.normal(size=(n, 2, 2)) + 1j * rng.normal(size=(n, 2, 2))
            ados = 0.5 * (raw + raw.conj().transpose(0, 2, 1))
            st = state_from_ados(ados, e, x_op, h_op)
            ref = naive_hierarchy_derivative(ados, e, x_op, h_op)
            worst = max(worst, float(np.abs(hierarchy_derivative(st) - ref).max()))
    return worst


def criterion_9(art: Artifacts) -> CriterionResult:
    tol_struct = 1e-9
    worst_trace = max(run_invariants(r)["max_trace_err"] for r in art.all_records)
    worst_r = max(run_invariants(r)["max_r_excess"] for r in art.all_records)
    worst_dsum = max(run_invariants(r)["max_dsum_err"] for r in art.all_records)
    msgs = [f"trace err {worst_trace:.2g}", f"|r|-1 excess {worst_r:.2g}",
            f"d1+d2-1 err {worst_dsum:.2g}",
            f"hermiticity (complex-path cross-check) {art.herm_drift:.2g}"]
    ok = (worst_trace < tol_struct and worst_r < tol_struct
          and worst_dsum < tol_struct and art.herm_drift < tol_struct)
    for label, tol, recs in art.uniqueness:
        snaps = [r.snapshot_bloch() for r in recs]
        spread = max(float(np.linalg.norm(a - b)) for a in snaps for b in snaps)
        ok &= spread <= 2.0 * tol
        msgs.append(f"uniqueness {label}: spread {spread:.2g} (bound {2 * tol:.2g})")
    return CriterionResult("9", "structural invariants and steady-state uniqueness",
                           bool(ok), "; ".join(msgs))


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9)


def write_verify_csvs(art: Artifacts, out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for case, sweep in art.sweeps.items():
        p = os.path.join(out_dir, f"sweep_case_{case}.csv")
        write_sweep_csv(sweep, p)
        paths.append(p)
        for lam, rec in zip(sweep.lambdas, sweep.trajectories):
            p = os.path.join(out_dir, f"trajectory_case_{case}_lambda_{lam:g}.csv")
            write_trajectory_csv(rec, p)
            paths.append(p)
    p = os.path.join(out_dir, "trajectory_case_I_psi2_weak.csv")
    write_trajectory_csv(art.c1_records[1], p)
    paths.append(p)
    return paths


def run_all(quick: bool = False, out_dir: str | None = None,
            workers: int | None = None):
    """Compute artifacts, evaluate all criteria, print one line per criterion."""
    mode = "quick smoke suite (reduced parameters, loose bounds)" if quick \
        else "full acceptance suite (stated tolerances)"
    print(f"pointer-therm verify: {mode}")
    art = compute_artifacts(quick=quick, workers=workers)
    results = [fn(art) for fn in CRITERIA]
    for res in results:
        print(res.line())
    print("criterion 10 (figure rendering) lives in the separate plotting package tests")
    if out_dir:
        paths = write_verify_csvs(art, out_dir)
        print(f"wrote {len(paths)} CSV files to {out_dir}")
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return results
