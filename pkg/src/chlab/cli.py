"""Command-line interface: `chlab <subcommand> ...`.

Exit codes: 0 success, 2 invariant violation, 3 I/O or input-format error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from . import forward_scattering as fs
from . import harness, io
from .errors import ChlabError, InvariantViolation, MissingData
from .pde_reference import PeriodicGrid, evolve
from .soliton_rh import DiscreteSpectrum, asymptotic_approximant, reconstruct

EXIT_OK, EXIT_INVARIANT, EXIT_IO = 0, 2, 3


def _out(args, default: str) -> Path:
    return Path(args.out if getattr(args, "out", None) else default)


def cmd_scatter(args, cfg) -> int:
    profile = io.load_profile(args.profile)
    data = fs.scatter(profile, K_max=args.K_max, nk=args.nk)
    path = io.save_scattering(data, _out(args, "scattering.json"))
    print(f"poles={list(data.poles)} c={list(data.norming)} a(i/2)={data.a_half_i:.12g} -> {path}")
    return EXIT_OK


def cmd_soliton(args, cfg) -> int:
    data = io.load_scattering(args.data)
    spec = DiscreteSpectrum.from_scattering(data)
    if args.xi is not None:
        sol = asymptotic_approximant(data, args.xi, args.t, window=args.window, n_samples=args.n)
        y, x, u = sol.y_grid, sol.x_of_y, sol.u_of_y
    else:
        y = np.linspace(args.ymin, args.ymax, args.n)
        u, x = reconstruct(spec, y, args.t)
    path = io.write_csv(_out(args, "solution.csv"), ["y", "x", "u"], zip(y, x, u), cfg)
    print(f"max u = {np.max(u):.10g} -> {path}")
    return EXIT_OK


def cmd_evolve(args, cfg) -> int:
    prof = io.load_json(args.profile)
    grid = PeriodicGrid(args.domain[0], args.domain[1], args.modes)
    u0 = io.field_on(prof, grid.nodes)
    snaps = list(np.arange(args.snap, args.T + 1e-9, args.snap)) if args.snap > 0 else []
    states = evolve(u0, args.T, dt=args.dt, grid=grid, snap_times=snaps)
    out = _out(args, "run")
    for s in states:
        io.write_csv(out / f"snap_t{s.t:09.3f}.csv", ["x", "u"], zip(s.x, s.u), cfg)
    io.write_csv(out / "ledger.csv", ["t", "q1", "q2", "q3"], [(s.t, *s.ledger) for s in states], cfg)
    print(f"{len(states)} snapshots -> {out}")
    return EXIT_OK


def cmd_compare(args, cfg) -> int:
    xs, us = io.read_columns(args.solution, ["x", "u"])
    xp, up = io.read_columns(args.snapshot, ["x", "u"])
    sel = (xp >= xs.min()) & (xp <= xs.max())
    if not np.any(sel):
        raise MissingData("solution and snapshot do not overlap in x")
    diff = up[sel] - np.interp(xp[sel], xs, us)
    dx = float(xp[1] - xp[0])
    rows = [("sup", float(np.max(np.abs(diff)))), ("L2", float(np.sqrt(np.sum(diff**2) * dx))),
            ("n_points", int(sel.sum()))]
    path = io.write_csv(_out(args, "compare.csv"), ["metric", "value"], rows, cfg)
    print(f"sup={rows[0][1]:.3e} L2={rows[1][1]:.3e} -> {path}")
    return EXIT_OK


def cmd_regions(args, cfg) -> int:
    poles = io.load_scattering(args.data).poles if args.data else []
    path = _out(args, "regions.csv")
    harness.emit_region_atlas(args.ximin, args.ximax, args.n, poles, args.delta, path=path, config=cfg)
    print(f"{args.n} rows -> {path}")
    return EXIT_OK


def cmd_tracecheck(args, cfg) -> int:
    profile = io.load_profile(args.profile)
    data = fs.scatter(profile, K_max=args.K_max, nk=args.nk)
    rep = fs.trace_formula_check(data, profile)
    path = io.write_csv(_out(args, "tracecheck.csv"), ["k", "rel_residual"], zip(rep["k"], rep["rel"]), cfg)
    print(f"max_rel_residual={rep['max_rel_residual']:.3e} a_half_residual={rep['a_half_residual']:.3e} -> {path}")
    return EXIT_OK


def cmd_bench(args, cfg) -> int:
    conf = harness.ExperimentConfig.from_dict(cfg)
    reports = harness.run_ray_benchmark(conf, threads=args.threads)
    path = harness.write_decay_reports(reports, _out(args, conf.out_dir), conf)
    for r in reports:
        print(f"xi={r.xi:+.4f} {r.region:14s} loglog={r.loglog.slope:+.4f} semilog={r.semilog.slope:+.4f} "
              f"claimed_rate={r.claimed_rate:+.4f}")
    print(f"-> {path}")
    return EXIT_OK


def cmd_roundtrip(args, cfg) -> int:
    spec = DiscreteSpectrum(tuple(args.poles), tuple(args.constants))
    rep = harness.run_roundtrip(spec, L=args.L, n=args.n)
    rows = [("kappa_error", rep.kappa_error), ("c_rel_error", rep.c_rel_error), ("ordered", int(rep.ordered))]
    path = io.write_csv(_out(args, "roundtrip.csv"), ["metric", "value"], rows, cfg)
    print(f"poles={list(rep.poles_out)} c={list(rep.constants_out)} kappa_err={rep.kappa_error:.2e} "
          f"c_rel_err={rep.c_rel_error:.2e} -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON file with option defaults")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="chlab", parents=[common])
    p.add_argument("--version", action="version", version=f"chlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scatter", parents=[common], help="forward scattering of a profile")
    s.add_argument("--profile", required=True)
    s.add_argument("--K-max", dest="K_max", type=float, default=8.0)
    s.add_argument("--nk", type=int, default=1024)
    s.set_defaults(func=cmd_scatter)

    s = sub.add_parser("soliton", parents=[common], help="reflectionless reconstruction (y, x, u)")
    s.add_argument("--data", required=True)
    s.add_argument("--t", type=float, default=0.0)
    s.add_argument("--xi", type=float, default=None, help="ray: evaluate the asymptotic approximant")
    s.add_argument("--window", type=float, default=40.0)
    s.add_argument("--n", type=int, default=2001)
    s.add_argument("--ymin", type=float, default=-40.0)
    s.add_argument("--ymax", type=float, default=40.0)
    s.set_defaults(func=cmd_soliton)

    s = sub.add_parser("evolve", parents=[common], help="direct PDE evolution")
    s.add_argument("--profile", required=True)
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--snap", type=float, default=0.0)
    s.add_argument("--dt", type=float, default=2e-3)
    s.add_argument("--modes", type=int, default=4096)
    s.add_argument("--domain", type=float, nargs=2, default=(-200.0, 600.0))
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("compare", parents=[common], help="sup/L2 difference of a solution and a snapshot")
    s.add_argument("--solution", required=True)
    s.add_argument("--snapshot", required=True)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("regions", parents=[common], help="region atlas over a xi range")
    s.add_argument("--ximin", type=float, default=-2.0)
    s.add_argument("--ximax", type=float, default=4.0)
    s.add_argument("--n", type=int, default=600)
    s.add_argument("--data", default=None)
    s.add_argument("--delta", type=float, default=0.05)
    s.set_defaults(func=cmd_regions)

    s = sub.add_parser("tracecheck", parents=[common], help="trace formula residuals")
    s.add_argument("--profile", required=True)
    s.add_argument("--K-max", dest="K_max", type=float, default=8.0)
    s.add_argument("--nk", type=int, default=1024)
    s.set_defaults(func=cmd_tracecheck)

    s = sub.add_parser("bench", parents=[common], help="ray decay benchmark from --config")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("roundtrip", parents=[common], help="inverse then forward scattering")
    s.add_argument("--poles", type=float, nargs="*", default=[0.3])
    s.add_argument("--constants", type=float, nargs="*", default=[1.0])
    s.add_argument("--L", type=float, default=60.0)
    s.add_argument("--n", type=int, default=2048)
    s.set_defaults(func=cmd_roundtrip)
    return p


def _apply_config(args, argv: List[str]) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        cfg = io.load_json(args.config)
        # config values replace subcommand defaults, explicit flags win
        explicit = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
        for key, val in cfg.items():
            if hasattr(args, key) and key not in explicit:
                setattr(args, key, val)
    if not hasattr(args, "threads"):
        args.threads = 1
    return cfg


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_config(args, argv)
        if args.command == "bench" and not cfg:
            raise MissingData("bench needs --config")
        prov = dict(cfg)
        prov.update({k: v for k, v in vars(args).items() if k not in ("func", "config", "out", "threads")})
        if args.command == "bench":
            prov = cfg
        return args.func(args, prov)
    except InvariantViolation as exc:
        print(f"invariant violation: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (OSError, json.JSONDecodeError, MissingData, KeyError) as exc:
        print(f"input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ChlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
