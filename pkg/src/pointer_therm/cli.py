"""Command-line entry points: simulate, sweep, verify.

Exit codes: 0 success, 1 configuration error or failed verification,
2 numerical blowup.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import parse_config
from .errors import ConfigError, NumericalBlowupError, PointerThermError
from .experiments import CASE_COUPLINGS, LAMBDA_GRID, RunSpec, run_case, run_spec
from .trajectory import write_sweep_csv, write_trajectory_csv

_FLAG_TO_KEY = {
    "omega0": "omega0",
    "temperature": "temperature",
    "lam": "lambda",
    "gamma_drude": "gamma_drude",
    "coupling": "coupling",
    "coupling_ax": "coupling.ax",
    "coupling_ay": "coupling.ay",
    "coupling_az": "coupling.az",
    "initial_state": "initial_state",
    "depth": "depth",
    "dt": "dt",
    "t_max": "t_max",
    "steady_tol": "steady_tol",
    "output": "output",
}


def _add_config_flags(sub):
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--omega0", type=float)
    sub.add_argument("--temperature", type=float)
    sub.add_argument("--lambda", dest="lam", type=float)
    sub.add_argument("--gamma-drude", dest="gamma_drude", type=float)
    sub.add_argument("--coupling", choices=["sx", "sxsz"])
    sub.add_argument("--coupling-ax", dest="coupling_ax", type=float)
    sub.add_argument("--coupling-ay", dest="coupling_ay", type=float)
    sub.add_argument("--coupling-az", dest="coupling_az", type=float)
    sub.add_argument("--initial-state", dest="initial_state")
    sub.add_argument("--depth", type=int)
    sub.add_argument("--dt", type=float)
    sub.add_argument("--t-max", dest="t_max", type=float)
    sub.add_argument("--steady-tol", dest="steady_tol", type=float)
    sub.add_argument("--output")


def _config_from_args(args) -> "parse_config":
    overrides = {}
    for attr, key in _FLAG_TO_KEY.items():
        val = getattr(args, attr, None)
        if val is not None:
            overrides[key] = val
    return parse_config(args.config, overrides)


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    print("resolved configuration:")
    print(cfg.echo())
    spec = RunSpec(lam=cfg.lam, coupling=cfg.coupling, beta=cfg.beta,
                   rho0_bloch=tuple(cfg.initial_bloch()), depth=cfg.depth,
                   omega0=cfg.omega0, gamma=cfg.gamma_drude, dt=cfg.dt,
                   t_max=cfg.t_max, steady_tol=cfg.steady_tol)
    rec = run_spec(spec)
    write_trajectory_csv(rec, cfg.output)
    state = (f"steady at t={rec.steady_time:g}" if rec.steady
             else f"not steady by t={rec.times[-1]:g} (flagged)")
    print(f"wrote {len(rec)} rows to {cfg.output}; {state}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    coupling = CASE_COUPLINGS[args.case] if args.case else cfg.coupling
    out_dir = args.output_dir
    os.makedirs(out_dir, exist_ok=True)
    print("resolved configuration:")
    print(cfg.echo())
    sweep = run_case(
        coupling, lam_list=LAMBDA_GRID, temperature=cfg.temperature,
        rho0_list=(tuple(cfg.initial_bloch()),), omega0=cfg.omega0,
        gamma=cfg.gamma_drude,
        depth=cfg.depth if "depth" in cfg.explicit else None,
        steady_tol=cfg.steady_tol,
        t_max=cfg.t_max if "t_max" in cfg.explicit else None)
    case_tag = args.case or "custom"
    sweep_path = os.path.join(out_dir, f"sweep_case_{case_tag}.csv")
    write_sweep_csv(sweep, sweep_path)
    paths = [sweep_path]
    for lam, rec in zip(sweep.lambdas, sweep.trajectories):
        p = os.path.join(out_dir, f"trajectory_case_{case_tag}_lambda_{lam:g}.csv")
        write_trajectory_csv(rec, p)
        paths.append(p)
    not_steady = sweep.metadata.get("not_steady", "")
    if not_steady:
        print(f"warning: runs not steady by t_max at lambda in {{{not_steady}}}")
    print("wrote:")
    for p in paths:
        print(" ", p)
    return 0


def cmd_verify(args) -> int:
    from .acceptance import run_all
    results = run_all(quick=args.quick, out_dir=args.output_dir)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointer-therm",
        description="HEOM qubit thermalization and pointer-basis analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one trajectory, write its CSV")
    _add_config_flags(sim)
    sim.set_defaults(func=cmd_simulate)

    swp = sub.add_parser("sweep", help="coupling-strength sweep, write sweep + trajectory CSVs")
    swp.add_argument("--case", choices=["I", "II"],
                     help="I: X = sigma_x; II: X = (sigma_x + sigma_z)/2")
    swp.add_argument("--output-dir", default="sweep_out")
    _add_config_flags(swp)
    swp.set_defaults(func=cmd_sweep)

    ver = sub.add_parser("verify", help="run the acceptance suite, print PASS/FAIL lines")
    ver.add_argument("--quick", action="store_true",
                     help="reduced-parameter smoke suite (about two minutes)")
    ver.add_argument("--output-dir", default="verify_out")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalBlowupError as exc:
        print(f"numerical blowup: {exc}", file=sys.stderr)
        return 2
    except PointerThermError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
