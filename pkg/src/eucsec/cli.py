"""Command-line front end: ``eucsec <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import harness
from .conjecture import FAMILIES, leaderboard_csv, search
from .distortion import evaluate
from .generators import GENERATORS, FrequencySet, kashin_sample, make_subspace
from .linalg import orthonormality_residual
from .matrix_io import write_matrix
from .types import CapExceededError, DomainError, TheoremViolation

THREADS_ENV = "EUCSEC_THREADS"


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise SystemExit(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _emit(args, rows: list, mode: str) -> None:
    text = harness.rows_to_json(rows, mode) if args.format == "json" \
        else harness.rows_to_csv(rows, mode)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bounds(args) -> int:
    d_rule = args.d if args.d in ("all",) or ".." in args.d else [int(x) for x in args.d.split(",")]
    rows = harness.bounds_table(args.N, d_rule, args.p, args.field, args.measure)
    _emit(args, rows, "bounds")
    return 0


def cmd_distortion(args) -> int:
    params = _parse_params(args.param)
    E = make_subspace(args.generator, params, args.seed)
    try:
        est = evaluate(E, args.p, args.measure, args.restarts, args.restarts_min, args.seed,
                       args.cap)
    except TheoremViolation as exc:
        print(f"THEOREM VIOLATION: {exc}", file=sys.stderr)
        return harness.EXIT_VIOLATION
    doc = est.to_dict()
    doc["provenance"] = E.provenance
    text = json.dumps(doc, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text)
    return 0


def cmd_generate(args) -> int:
    E = make_subspace(args.generator, _parse_params(args.param), args.seed)
    if args.out:
        write_matrix(args.out, E.basis)
        print(f"wrote {E.N}x{E.d} {E.field.value} basis to {args.out}")
    else:
        np.savetxt(sys.stdout, E.basis, delimiter=",", fmt="%.17g")
    return 0


def cmd_conjecture(args) -> int:
    fams = args.family or list(FAMILIES)
    rows = search(args.variant, args.p, fams, args.instances, args.seed, args.escalation,
                  args.budget, cap=args.cap, threads=args.threads)
    text = leaderboard_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    bad = [r for r in rows if r.lhs_kind == "exact" and r.slack < -1e-9]
    return harness.EXIT_VIOLATION if bad else 0


def cmd_kashin(args) -> int:
    rows = []
    for i in range(args.samples):
        k = kashin_sample(args.N, args.eta, args.seed + i, args.restarts)
        rows.append(k.row())
    _emit(args, rows, "kashin")
    return 0


def cmd_run(args) -> int:
    try:
        spec = harness.load_spec(args.spec)
    except harness.CapError as exc:
        print(f"cap violation: {exc}", file=sys.stderr)
        return harness.EXIT_CAP
    except (harness.SpecError, OSError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return harness.EXIT_PARSE
    if args.cap is not None:
        if args.cap > harness.MAX_CAP:
            print(f"cap violation: {args.cap} > {harness.MAX_CAP}", file=sys.stderr)
            return harness.EXIT_CAP
        spec.budget["cap"] = args.cap
    fmts = [args.format] if args.format else None
    res = harness.run_spec(spec, args.out, args.threads, fmts)
    m = res.manifest
    print(f"{m['name']}: {m['total_instances']} rows, {m['violation_count']} violations")
    for f in res.files:
        print(f"  {f}")
    return res.exit_code


def cmd_describe(args) -> int:
    params = _parse_params(args.param)
    if args.generator not in GENERATORS:
        print(f"unknown generator {args.generator!r}; known: {', '.join(GENERATORS)}",
              file=sys.stderr)
        return 2
    E = make_subspace(args.generator, params, args.seed)
    print(f"generator: {args.generator}")
    print(f"N={E.N} d={E.d} field={E.field.value}")
    print(f"orthonormality residual: {orthonormality_residual(E.basis):.3e}")
    print(f"provenance: {json.dumps(E.provenance)}")
    if "S" in E.provenance:
        fs = FrequencySet(E.N, tuple(E.provenance["S"]), E.provenance.get("construction", ""))
        print(f"S ({len(fs.S)}): {list(fs.S)}")
        print(f"Sidon check: {'pass' if fs.is_sidon() else 'fail'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eucsec", description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=_default_threads(),
                    help=f"worker threads (default from ${THREADS_ENV} or 1)")
    ap.add_argument("--format", choices=("csv", "json"), default=None)
    ap.add_argument("--out", default=None, help="output path")
    ap.add_argument("--cap", type=int, default=None, help="sign-enumeration cap")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="tabulate radius bounds")
    b.add_argument("--N", type=int, nargs="+", required=True)
    b.add_argument("--d", default="all", help="'all', 'k..N' or comma list")
    b.add_argument("--p", type=float, nargs="+", default=[1.0])
    b.add_argument("--field", default="real")
    b.add_argument("--measure", default="counting")
    b.set_defaults(func=cmd_bounds)

    d = sub.add_parser("distortion", help="lambda_min / lambda_max of one subspace")
    d.add_argument("--generator", required=True)
    d.add_argument("--param", nargs="*", help="generator parameters key=value")
    d.add_argument("--p", type=float, default=1.0)
    d.add_argument("--measure", default="counting")
    d.add_argument("--restarts", type=int, default=50)
    d.add_argument("--restarts-min", type=int, default=200)
    d.set_defaults(func=cmd_distortion)

    g = sub.add_parser("generate", help="write a generated basis")
    g.add_argument("--generator", required=True)
    g.add_argument("--param", nargs="*")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("conjecture", help="counterexample search leaderboard")
    c.add_argument("--variant", choices=("B", "C"), required=True)
    c.add_argument("--p", type=float, nargs="+", required=True)
    c.add_argument("--family", nargs="*", choices=FAMILIES)
    c.add_argument("--instances", type=int, default=100)
    c.add_argument("--budget", type=int, default=10)
    c.add_argument("--escalation", type=int, default=100)
    c.set_defaults(func=cmd_conjecture)

    k = sub.add_parser("kashin", help="empirical Kashin constants")
    k.add_argument("--N", type=int, required=True)
    k.add_argument("--eta", type=float, required=True)
    k.add_argument("--samples", type=int, default=10)
    k.add_argument("--restarts", type=int, default=8)
    k.set_defaults(func=cmd_kashin)

    r = sub.add_parser("run", help="run a sweep file (TOML or JSON)")
    r.add_argument("spec")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("describe", help="summarize a generated subspace")
    s.add_argument("generator")
    s.add_argument("param", nargs="*")
    s.set_defaults(func=cmd_describe)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cap is None and args.command not in ("run",):
        args.cap = 20
    try:
        return args.func(args)
    except (DomainError, KeyError, CapExceededError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return harness.EXIT_PARSE if not isinstance(exc, CapExceededError) else harness.EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
