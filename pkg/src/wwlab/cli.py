"""Command line entry point: ``wwlab <verb> --config FILE [--out DIR] [--seed S] [--threads T]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import harness, heat, io, lattice, spectral
from .dirichlet import poincare_profile
from .mms import ValidationError


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", required=True, help="experiment config (.cfg)")
    p.add_argument("--out", help="output directory (overrides [output] dir)")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads for lattice sweeps")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wwlab", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)
    common = _common()
    sub.add_parser("generate", parents=[common], help="build the instance and write space/operator files")
    sub.add_parser("spectrum", parents=[common], help="decompose the operator and cache the spectrum")
    lp = sub.add_parser("lattice", parents=[common], help="build and verify one maximal lattice")
    lp.add_argument("--rho", type=float, required=True)
    lp.add_argument("--order", default="index_order", choices=lattice.ORDERS)
    pp = sub.add_parser("poincare", parents=[common], help="Poincare constants on balls")
    pp.add_argument("--rho", type=float, nargs="+", required=True)
    pp.add_argument("--centers", type=int, default=16, help="number of evenly spaced centers")
    sub.add_parser("heat", parents=[common], help="Gaussian envelope fit of the heat kernel")
    sub.add_parser("verify-wwl", parents=[common], help="weak Weyl sweep only")
    sub.add_parser("report", parents=[common], help="full pipeline with report.json, tables and plots")
    return parser


def _setup(args):
    cfg = harness.load_config(args.config, out=args.out, seed=args.seed, threads=args.threads)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg, harness._instance(cfg)


def _dec(cfg, inst):
    return harness._decompose(inst, cfg.out_dir / "cache")


def cmd_generate(args):
    cfg, inst = _setup(args)
    sp = io.save_space(inst.space, cfg.out_dir / "space.json")
    op = io.save_operator(inst.operator, cfg.out_dir / "operator.json", sp)
    print(f"{inst.space.label}: {inst.space.n} points -> {sp}, {op}")
    return 0


def cmd_spectrum(args):
    cfg, inst = _setup(args)
    dec = _dec(cfg, inst)
    np.savetxt(cfg.out_dir / "eigenvalues.txt", dec.eigenvalues, fmt="%.12g")
    print(" ".join(f"{x:.6g}" for x in dec.eigenvalues[:12]))
    return 0


def cmd_lattice(args):
    cfg, inst = _setup(args)
    from .mms import doubling_estimate
    lat = lattice.build_lattice(inst.space, args.rho, args.order, seed=cfg.seed)
    rep = lattice.verify_lattice(inst.space, lat, doubling_estimate(inst.space).D)
    io.save_lattice(lat, cfg.out_dir / f"lattice_{args.order}_{args.rho:g}.json")
    print(f"rho={rep.rho:g} card={rep.cardinality} multiplicity={rep.multiplicity} bound={rep.bound:.3g}")
    return 0


def cmd_poincare(args):
    cfg, inst = _setup(args)
    step = max(1, inst.space.n // args.centers)
    for rho in args.rho:
        prof = poincare_profile(inst.operator, rho, range(0, inst.space.n, step))
        print(f"rho={rho:g} C={prof.sup_constant:.6g} disconnected={len(prof.disconnected)}")
    return 0


def cmd_heat(args):
    cfg, inst = _setup(args)
    if not cfg.checks.t_grid:
        raise harness.ConfigError("[checks] needs t or t_min/t_max for the heat verb")
    fit = heat.gaussian_fit(_dec(cfg, inst), inst.space, cfg.checks.t_grid, cfg.checks.d2t_cap)
    print(json.dumps({"C1": fit.C1, "C2": fit.C2, "c1": fit.c1, "c2": fit.c2, "ls_rate": fit.ls_rate,
                      "exclusion_rate": fit.exclusion_rate, "diag_ratio": fit.diag_ratio}, indent=1))
    return 0 if fit.holds() else 1


def cmd_verify_wwl(args):
    cfg, inst = _setup(args)
    dec = _dec(cfg, inst) if cfg.sweep.spectrum == "discrete" else None
    rep = harness.verify_wwl(inst, cfg.sweep.omega, cfg.sweep.gamma, cfg.sweep.trials, seed=cfg.seed,
                             spectrum=cfg.sweep.spectrum, dec=dec, threads=cfg.threads)
    harness.write_tables(rep, cfg.out_dir)
    (cfg.out_dir / "wwl.json").write_text(json.dumps(rep.to_dict(), indent=1))
    print(f"c={rep.c:.4g} gamma={rep.gamma} spread={rep.ratio_spread:.3g} rows={len(rep.rows)}")
    return 0 if rep.gamma is not None and all(r.passed for r in rep.rows) else 1


def cmd_report(args):
    return harness.run_experiment(args.config, out=args.out, seed=args.seed, threads=args.threads)


COMMANDS = {"generate": cmd_generate, "spectrum": cmd_spectrum, "lattice": cmd_lattice,
            "poincare": cmd_poincare, "heat": cmd_heat, "verify-wwl": cmd_verify_wwl, "report": cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.verb](args)
    except harness.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (harness.ConfigError, ValidationError, FileNotFoundError, lattice.LatticeVerificationError,
            spectral.CapabilityError, heat.FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
