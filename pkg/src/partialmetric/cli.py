"""Command line front end.

Exit codes: 0 when every requested check passes or certifies, 1 when a
check fails or a certificate is invalid, 2 on usage or domain errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

from .contraction import SelfMap
from .convergence import (
    SequenceTrace,
    analyze_proper_convergence,
    analyze_tau_convergence,
    check_pairwise_limit_identity,
    detect_cauchy,
    trace_csv,
)
from .core import ContractError, DomainError, audit_axioms
from .solver import picard_solve
from .spaces import TableRejected, load_table, make_max_space, make_punctured_interval
from .witness import IndexBudgetExceeded, WitnessMap, audit_witness

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def resolve_space(spec: str):
    if spec == "max":
        return make_max_space()
    if spec == "punctured":
        return make_punctured_interval().base
    if spec.startswith("table:"):
        return load_table(spec[len("table:"):])
    raise UsageError(f"unknown space {spec!r}; expected max, punctured or table:<path>")


def resolve_map(spec: str, space) -> SelfMap:
    if spec == "half":
        return SelfMap(lambda t: t / 2, "t/2")
    if spec == "third":
        return SelfMap(lambda t: t / 3, "t/3")
    if spec == "identity":
        return SelfMap(lambda t: t, "identity")
    if spec.startswith("scale:"):
        r = float(spec[len("scale:"):])
        return SelfMap(lambda t: r * t, f"{r!r}*t")
    if spec.startswith("table:"):
        images = [int(v) for v in spec[len("table:"):].split(",")]
        if not space.is_finite or len(images) != space.size:
            raise UsageError("a table map needs a finite space and one image per point")
        return SelfMap(lambda i: images[i], f"table map {images}")
    raise UsageError(f"unknown map {spec!r}")


def resolve_sequence(spec: str):
    if spec == "inverse":
        return lambda n: 1 / n
    if spec == "halving":
        return lambda n: 2.0**-n
    if spec.startswith("const:"):
        c = float(spec[len("const:"):])
        return lambda n: c
    raise UsageError(f"unknown sequence {spec!r}; expected inverse, halving or const:<c>")


def _emit(args, payload: dict, rows: Optional[str] = None) -> None:
    if args.format == "csv":
        if rows is None:
            raise UsageError(f"{args.command} has no tabular output; use --format json")
        text = rows
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_audit(args) -> int:
    space = resolve_space(args.space)
    report = audit_axioms(space, args.trials, args.seed, args.tol)
    _emit(args, {"space": space.label, "seed": args.seed, **report.to_dict()})
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_converge(args) -> int:
    space = resolve_space(args.space)
    trace = SequenceTrace(resolve_sequence(args.sequence), args.horizon, space)
    anchor = args.anchor
    reports = {"cauchy": detect_cauchy(trace, args.window, args.eps).to_dict()}
    ok = reports["cauchy"]["verdict"] == "CertifiedAtResolution"
    if anchor is not None:
        tau = analyze_tau_convergence(trace, anchor, args.window, args.eps)
        proper = analyze_proper_convergence(trace, anchor, args.window, args.eps)
        reports["tau"], reports["proper"] = tau.to_dict(), proper.to_dict()
        ok = ok and tau.certified and proper.certified
        if proper.certified:
            pairwise = check_pairwise_limit_identity(trace, anchor, args.window, args.eps)
            reports["pairwise_identity"] = pairwise.to_dict()
            ok = ok and pairwise.certified
    _emit(args, {"space": space.label, "sequence": args.sequence, "reports": reports},
          trace_csv(trace, anchor))
    return EXIT_OK if ok else EXIT_FAIL


def _certificate_rows(cert, space, x0, f, horizon) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "x_n", "p(x*,x_n)", "p(x_n,x_n)"])
    x = x0
    for n in range(horizon + 1):
        w.writerow([n, repr(x), repr(space.eval(cert.x_star, x)), repr(space.eval(x, x))])
        x = f(x)
    return buf.getvalue()


def cmd_solve(args) -> int:
    space = resolve_space(args.space)
    f = resolve_map(args.map, space)
    x0 = space.validate(int(args.x0) if space.is_finite else args.x0)
    cert = picard_solve(space, f, x0, args.max_iter, args.eps, args.horizon, args.window)
    _emit(args, {"space": space.label, "map": f.label, "x0": x0, "certificate": cert.to_dict()},
          _certificate_rows(cert, space, x0, f, args.horizon))
    return EXIT_OK if cert.valid else EXIT_FAIL


def cmd_demo(args) -> int:
    space = make_max_space()
    f = SelfMap(lambda t: t / 2, "t/2")
    cert = picard_solve(space, f, 1.0, args.max_iter, args.eps, args.horizon, args.window)
    pts, x = [], 1.0
    for _ in range(args.horizon):
        x = f(x)
        pts.append(x)
    trace = SequenceTrace.from_points(pts, space)
    limit = analyze_proper_convergence(trace, 0.0, args.window, args.eps)
    pairwise = check_pairwise_limit_identity(trace, 0.0, args.window, args.eps) if limit.certified else None
    table = [
        {"n": n, "x_n": xn, "p(0,x_n)": space.eval(0.0, xn), "p(x_n,x_n)": space.eval(xn, xn)}
        for n, xn in enumerate(pts, start=1)
    ]
    ok = cert.valid and cert.proper.certified and limit.certified and pairwise.certified
    ok = ok and abs(cert.x_star) <= args.eps
    payload = {
        "space": space.label,
        "map": f.label,
        "x0": 1.0,
        "certificate": cert.to_dict(),
        "proper_to_zero": limit.to_dict(),
        "pairwise_identity": None if pairwise is None else pairwise.to_dict(),
        "table": table,
    }
    _emit(args, payload, trace_csv(trace, 0.0))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_witness(args) -> int:
    w = WitnessMap()
    report = audit_witness(w, args.samples, args.seed, args.eps, args.depth)
    _emit(args, report.to_dict())
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--format", choices=["json", "csv"], default="json", help="artifact format")
    common.add_argument("--out", default=None, help="output path; stdout when omitted")

    parser = argparse.ArgumentParser(
        prog="partialmetric", description=__doc__, formatter_class=fmt
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", parents=[common], formatter_class=fmt,
                       help="randomised pm1-pm4 audit")
    p.add_argument("--space", default="max", help="max | punctured | table:<path>")
    p.add_argument("--trials", type=_positive_int, default=10_000, help="sampled triples")
    p.add_argument("--tol", type=_nonneg_float, default=0.0, help="axiom tolerance")
    p.set_defaults(run=cmd_audit)

    p = sub.add_parser("converge", parents=[common], formatter_class=fmt,
                       help="convergence analyses of a built-in sequence")
    p.add_argument("--space", default="max", help="max | punctured | table:<path>")
    p.add_argument("--sequence", default="inverse", help="inverse | halving | const:<c>")
    p.add_argument("--anchor", type=float, default=None, help="candidate limit x")
    p.add_argument("--horizon", type=_positive_int, default=10_000, help="N")
    p.add_argument("--window", type=_positive_int, default=64, help="W")
    p.add_argument("--eps", type=_positive_float, default=1e-3, help="tail tolerance")
    p.set_defaults(run=cmd_converge)

    p = sub.add_parser("solve", parents=[common], formatter_class=fmt,
                       help="Picard iteration with a fixed-point certificate")
    p.add_argument("--space", default="max", help="max | punctured | table:<path>")
    p.add_argument("--map", default="half",
                   help="half | third | identity | scale:<r> | table:<i0,i1,...>")
    p.add_argument("--x0", type=float, default=1.0, help="starting point (index on tables)")
    p.add_argument("--max-iter", type=_positive_int, default=1000, help="iteration budget")
    p.add_argument("--eps", type=_positive_float, default=1e-9, help="pm1 tolerance")
    p.add_argument("--horizon", type=_positive_int, default=100, help="trace length N")
    p.add_argument("--window", type=_positive_int, default=32, help="tail window W")
    p.set_defaults(run=cmd_solve)

    p = sub.add_parser("witness", parents=[common], formatter_class=fmt,
                       help="audit the fixed-point-free witness map")
    p.add_argument("--samples", type=_positive_int, default=10_000, help="sampled points and pairs")
    p.add_argument("--depth", type=_positive_int, default=64, help="orbit truncation depth")
    p.add_argument("--eps", type=_positive_float, default=1e-12,
                   help="pm1 tolerance; must stay below (1-b) times the smallest sample")
    p.set_defaults(run=cmd_witness)

    p = sub.add_parser("demo", parents=[common], formatter_class=fmt,
                       help="max space, t -> t/2 from 1: certificate and proper-convergence table")
    p.add_argument("--max-iter", type=_positive_int, default=40, help="iteration budget")
    p.add_argument("--eps", type=_positive_float, default=1e-9, help="pm1 and tail tolerance")
    p.add_argument("--horizon", type=_positive_int, default=100, help="trace length N")
    p.add_argument("--window", type=_positive_int, default=32, help="tail window W")
    p.set_defaults(run=cmd_demo)
    return parser


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _nonneg_float(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text}")
    return v


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except TableRejected as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, DomainError, ContractError, IndexBudgetExceeded,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
