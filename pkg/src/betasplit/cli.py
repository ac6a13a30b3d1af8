"""Command-line front end.

Subcommands: ``exact`` (small-n rational laws), ``simulate`` (replicate
matrices from the tree, chain or path generators), ``verify`` (statistical
suites), ``limits`` (constants and limit covariance), ``dump-tree`` (one
realized tree as newline-delimited records).

Exit codes: 0 success / all checks passed, 1 verification failure, 2 usage
or validation error.  Relative ``--output`` paths are resolved against
$BETASPLIT_OUTDIR when it is set.  Identical configuration and seed produce
byte-identical outputs for every ``--threads`` value.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import chains, limits, subordinator, trees, verify
from .stats import SampleMatrix, reports_to_json


def _out_path(raw: str | None) -> Path | None:
    if raw is None:
        return None
    path = Path(raw)
    outdir = os.environ.get("BETASPLIT_OUTDIR")
    if outdir and not path.is_absolute():
        path = Path(outdir) / path
    return path


def _open_out(raw: str | None):
    path = _out_path(raw)
    if path is None:
        return sys.stdout, False
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w"), True


def _fail_usage(message: str) -> int:
    json.dump({"error": "usage", "message": message}, sys.stderr)
    sys.stderr.write("\n")
    return 2


def _cmd_exact(args) -> int:
    view = args.view
    if view == "tree":
        law = chains.exact_law(args.n, args.j)
    else:
        law = chains.exact_occupancy_law(args.n, args.j)
    total_name = "L" if view == "tree" else "K"
    hold_name = "D" if view == "tree" else "absorption"
    fh, close = _open_out(args.output)
    try:
        if args.format == "json":
            payload = {
                "n": law.n, "j": law.j, "view": law.view,
                "support": [
                    {"counts": list(key[:-1]), total_name: key[-1],
                     "probability": str(p)}
                    for key, p in sorted(law.support.items())
                ],
                "total_marginal": {str(v): str(p)
                                   for v, p in sorted(law.total_marginal().items())},
                "mean_total": str(law.total_mean()),
                f"mean_{hold_name}": str(law.hold_mean),
                f"var_{hold_name}": str(law.hold_variance()),
            }
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        else:
            fh.write(f"exact law, {view} view, n={law.n}, j={law.j}\n")
            fh.write(f"joint support of (counts_1..{law.j}, {total_name}):\n")
            for key, p in sorted(law.support.items()):
                fh.write(f"  counts={tuple(key[:-1])} {total_name}={key[-1]}"
                         f"  p={p} = {float(p):.6f}\n")
            fh.write(f"{total_name} marginal:\n")
            for v, p in sorted(law.total_marginal().items()):
                fh.write(f"  P{{{total_name}={v}}} = {p} = {float(p):.6f}\n")
            fh.write(f"E[{total_name}] = {law.total_mean()} "
                     f"= {float(law.total_mean()):.6f}\n")
            fh.write(f"E[{hold_name}] = {law.hold_mean} "
                     f"= {float(law.hold_mean):.6f}\n")
            fh.write(f"Var[{hold_name}] = {law.hold_variance()} "
                     f"= {float(law.hold_variance()):.6f}\n")
    finally:
        if close:
            fh.close()
    return 0


def _cmd_simulate(args) -> int:
    if args.generator == "tree":
        mat = trees.sample_leaf_matrix(args.beta, args.n, args.mode, args.j,
                                       args.reps, args.seed, threads=args.threads)
    elif args.generator == "chain":
        if args.beta != -1.0:
            raise ValueError("the chain generator is specific to beta = -1")
        if args.view == "tree":
            mat = chains.sample_leaf_matrix(args.n, args.j, args.reps,
                                            args.seed, threads=args.threads)
        else:
            mat = chains.sample_occupancy_matrix(args.n, args.j, args.reps,
                                                 args.seed, threads=args.threads)
    else:
        mat = subordinator.sample_occupancy_matrix(args.n, args.eps, args.j,
                                                   args.reps, args.seed,
                                                   threads=args.threads)
    fh, close = _open_out(args.output)
    try:
        if args.format == "json":
            mat.write_json(fh)
        else:
            mat.write_csv(fh)
    finally:
        if close:
            fh.close()
    return 0


def _cmd_verify(args) -> int:
    reports = verify.run_suite(args.suite, args.seed)
    for rep in reports:
        print(rep.line())
    if args.output:
        fh, close = _open_out(args.output)
        try:
            reports_to_json(reports, fh)
        finally:
            if close:
                fh.close()
    return 0 if all(r.passed for r in reports) else 1


def _cmd_limits(args) -> int:
    model = limits.limit_model(args.j)
    fh, close = _open_out(args.output)
    try:
        if args.format == "json":
            json.dump({
                "j": model.j, "m1": model.m1, "m2": model.m2, "a2": model.a2,
                "covariance": model.covariance.tolist(),
                "correlation_L_D": float(model.correlation()[-2, -1]),
            }, fh, indent=2)
            fh.write("\n")
        else:
            fh.write(f"m1 = zeta(2)      = {model.m1:.10f}\n")
            fh.write(f"m2 = 2 zeta(3)    = {model.m2:.10f}\n")
            fh.write(f"a2 = m2 / m1^3    = {model.a2:.10f}\n")
            corr = model.correlation()[-2, -1]
            fh.write(f"corr(L, D) limit  = {corr:.10f}\n")
            fh.write(f"covariance of (X_1..X_{model.j}, L, D), "
                     "plain-power normalization:\n")
            for row in model.covariance:
                fh.write("  " + " ".join(f"{v:+.6f}" for v in row) + "\n")
    finally:
        if close:
            fh.close()
    return 0


def _cmd_dump_tree(args) -> int:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(args.seed)))
    tree = trees.build_tree(args.beta, args.n, args.mode, rng)
    fh, close = _open_out(args.output)
    try:
        for line in tree.dump_lines():
            fh.write(line + "\n")
    finally:
        if close:
            fh.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="betasplit",
        description="Simulation and verification lab for critical "
                    "beta-splitting trees and the gap occupancy scheme.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="print the exact small-n law")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--j", type=int, default=3)
    p.add_argument("--view", choices=["tree", "occupancy"], default="tree")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--output", "-o")
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("simulate", help="write a replicate-by-statistic matrix")
    p.add_argument("--generator", choices=["tree", "chain", "subordinator"],
                   required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--beta", type=float, default=-1.0)
    p.add_argument("--j", type=int, default=3)
    p.add_argument("--mode", choices=["discrete", "continuous"],
                   default="continuous")
    p.add_argument("--view", choices=["tree", "occupancy"], default="tree",
                   help="statistics family for the chain generator")
    p.add_argument("--eps", type=float, default=subordinator.EPS_DEFAULT)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", "-o")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="run one statistical verification suite")
    p.add_argument("suite", choices=sorted(verify.SUITES))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", "-o", help="write the reports as JSON")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("limits", help="print limit constants and covariance")
    p.add_argument("--j", type=int, default=3)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--output", "-o")
    p.set_defaults(func=_cmd_limits)

    p = sub.add_parser("dump-tree", help="dump one realized tree as "
                       "'(size, holding_time, depth)' records")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, default=-1.0)
    p.add_argument("--mode", choices=["discrete", "continuous"],
                   default="continuous")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=_cmd_dump_tree)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        return _fail_usage(str(exc))


if __name__ == "__main__":
    sys.exit(main())
