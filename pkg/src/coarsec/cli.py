"""Command-line surface: build, certify, compare, subdivide, retract-check.

Exit codes: 0 success (certificate complete / flavors consistent), 2 a
certificate is incomplete ("none within schedule" somewhere), 1 usage or data
error, 3 an internal cross-flavor inconsistency (bug class).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ._version import __version__
from .certify import (FLAVORS, build_flavor_space, certify_with_timings, compare_flavors,
                      retract_transfer_experiment, stage_betti_table)
from .errors import CoarsecError
from .files import (dumps_canonical, load_point_map, load_space, resolve_schedule,
                    write_barcode_svg, write_betti_csv, write_certificate)
from .homology import Coefficients
from .subdivision import boundary_simplex, iterated_subdivision, standard_simplex

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCOMPLETE = 2
EXIT_INCONSISTENT = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; the contract reserves 2 for incomplete."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _build_parser() -> _Parser:
    parser = _Parser(prog="coarsec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"coarsec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_space_flags(p):
        p.add_argument("--input", required=True, help="space file (.space JSON)")
        p.add_argument("--schedule", help="thresholds: 'a:b' range or comma list")
        p.add_argument("--flavor", default="c-vr", choices=FLAVORS)
        p.add_argument("--coeff", default="z2", help="z2 | zp:<p> | z")
        p.add_argument("--max-dim", type=int, default=None,
                       help="dimension cap for complexes (default: the degree bound)")

    cert = sub.add_parser("certify", help="essential-connectivity certificate")
    common_space_flags(cert)
    cert.add_argument("--degree", type=int, required=True, help="degree bound n")
    cert.add_argument("--margin", type=float, default=0.0,
                      help="interior margin eroding the source window")
    cert.add_argument("--pi1-budget", type=int, default=2000,
                      help="state budget per loop for the pi_1 filling search (0 disables)")
    cert.add_argument("--out", help="certificate path (default: <input>.<flavor>.cert.json)")

    comp = sub.add_parser("compare", help="four-flavor comparison, tables, barcode")
    comp.add_argument("--input", required=True)
    comp.add_argument("--schedule")
    comp.add_argument("--degree", type=int, required=True)
    comp.add_argument("--coeff", default="z2")
    comp.add_argument("--max-dim", type=int, default=None)
    comp.add_argument("--margin", type=float, default=0.0)
    comp.add_argument("--pi1-budget", type=int, default=2000)
    comp.add_argument("--threads", type=int, default=1, help="worker threads for the flavor grid")
    comp.add_argument("--out-dir", required=True)

    build = sub.add_parser("build", help="build stage complexes and report sizes")
    common_space_flags(build)
    build.add_argument("--degree", type=int, default=2,
                       help="degree bound used for the default dimension cap")
    build.add_argument("--out", help="summary JSON path (default: stdout)")

    subd = sub.add_parser("subdivide", help="barycentric subdivision of a model or stage complex")
    subd.add_argument("--levels", type=int, required=True)
    subd.add_argument("--simplex", type=int, help="model simplex dimension")
    subd.add_argument("--boundary", action="store_true", help="use the boundary of the model")
    subd.add_argument("--input", help="space file (instead of a model simplex)")
    subd.add_argument("--schedule")
    subd.add_argument("--stage", type=int, default=1, help="schedule stage to build (1-based)")
    subd.add_argument("--flavor", default="c-vr", choices=("c-vr", "c-cech"))
    subd.add_argument("--max-dim", type=int, default=2)
    subd.add_argument("--out", help="summary JSON path (default: stdout)")

    retr = sub.add_parser("retract-check", help="coarse retract check and transfer experiment")
    retr.add_argument("--space-x", required=True)
    retr.add_argument("--space-y", required=True)
    retr.add_argument("--schedule-x")
    retr.add_argument("--schedule-y")
    retr.add_argument("--map-i", required=True, help="inclusion Y -> X (map JSON)")
    retr.add_argument("--map-r", required=True, help="retraction X -> Y (map JSON)")
    retr.add_argument("--degree", type=int, help="also run the transfer experiment at this bound")
    retr.add_argument("--coeff", default="z2")
    retr.add_argument("--equivalence", action="store_true",
                      help="additionally test for a coarse equivalence")
    retr.add_argument("--out", help="report JSON path (default: stdout)")
    return parser


def _emit(doc: dict, out_path):
    text = dumps_canonical(doc)
    if out_path:
        path = Path(out_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_certify(args) -> int:
    bundle = load_space(args.input)
    schedule = resolve_schedule(bundle, args.schedule)
    depth = bundle.window.depth if bundle.window is not None else None
    coeff = Coefficients.parse(args.coeff)
    cert, timings = certify_with_timings(
        schedule, args.degree, flavor=args.flavor, coeff=coeff,
        margin=args.margin, depth=depth, dim_cap=args.max_dim,
        pi1_budget=args.pi1_budget,
    )
    out = Path(args.out) if args.out else Path(args.input).with_suffix(f".{args.flavor}.cert.json")
    write_certificate(cert, out, input_digest=bundle.digest, timings=timings)
    rows = stage_betti_table(schedule, args.degree, args.flavor, coeff, dim_cap=args.max_dim)
    write_betti_csv(out.with_suffix(".betti.csv"), rows, str(coeff))
    status = "complete" if cert.complete else "incomplete"
    print(f"certificate {status}: {out}")
    return EXIT_OK if cert.complete else EXIT_INCOMPLETE


def _cmd_compare(args) -> int:
    bundle = load_space(args.input)
    schedule = resolve_schedule(bundle, args.schedule)
    depth = bundle.window.depth if bundle.window is not None else None
    coeff = Coefficients.parse(args.coeff)
    comparison = compare_flavors(
        schedule, args.degree, coeff=coeff, margin=args.margin, depth=depth,
        dim_cap=args.max_dim, pi1_budget=args.pi1_budget, threads=args.threads,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for flavor, cert in comparison.certificates.items():
        write_certificate(cert, out_dir / f"{flavor}.cert.json", input_digest=bundle.digest)
    report = {
        "format": 1,
        "kind": "flavor_comparison",
        "witnesses": {
            flavor: [s.witness for s in cert.stages]
            for flavor, cert in comparison.certificates.items()
        },
        "complete": {flavor: cert.complete for flavor, cert in comparison.certificates.items()},
        "sandwich_checks": [
            {"direction": c.direction, "stage": c.stage, "bound": c.predicted_bound,
             "actual": c.actual, "ok": c.ok}
            for c in comparison.checks
        ],
        "warnings": list(comparison.warnings),
        "consistent": comparison.consistent,
    }
    (out_dir / "comparison.json").write_text(dumps_canonical(report), encoding="utf-8")
    write_barcode_svg(out_dir / "barcode.svg", comparison.bars, len(schedule))
    for warning in comparison.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if not comparison.consistent:
        print("internal inconsistency: sandwich bounds violated", file=sys.stderr)
        return EXIT_INCONSISTENT
    print(f"comparison written to {out_dir}")
    return EXIT_OK


def _cmd_build(args) -> int:
    bundle = load_space(args.input)
    schedule = resolve_schedule(bundle, args.schedule)
    cap = args.max_dim if args.max_dim is not None else args.degree
    stages = []
    for j in range(1, len(schedule) + 1):
        space = build_flavor_space(args.flavor, schedule.stage(j), cap)
        stages.append({
            "stage": j,
            "label": schedule.labels[j - 1],
            "cells_by_dimension": list(space.counts),
        })
    doc = {
        "format": 1,
        "kind": "build_summary",
        "flavor": args.flavor,
        "dim_cap": cap,
        "points": schedule.ground.size,
        "stages": stages,
        "input_digest": f"sha256:{bundle.digest}",
    }
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_subdivide(args) -> int:
    if args.input and args.simplex is not None:
        raise CoarsecError("pass either --simplex or --input, not both")
    if args.simplex is not None:
        base = boundary_simplex(args.simplex) if args.boundary else standard_simplex(args.simplex)
        label = f"{'boundary of ' if args.boundary else ''}simplex of dimension {args.simplex}"
    elif args.input:
        bundle = load_space(args.input)
        schedule = resolve_schedule(bundle, args.schedule)
        base = build_flavor_space(args.flavor, schedule.stage(args.stage), args.max_dim)
        label = f"{args.flavor} complex at stage {args.stage}"
    else:
        raise CoarsecError("pass --simplex or --input")
    levels = [{"level": 0, "cells_by_dimension": list(base.counts)}]
    tower = iterated_subdivision(base, args.levels)
    for sd in tower:
        levels.append({"level": sd.level, "cells_by_dimension": list(sd.complex.counts)})
    doc = {"format": 1, "kind": "subdivision_summary", "base": label, "levels": levels}
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_retract_check(args) -> int:
    bx = load_space(args.space_x)
    by = load_space(args.space_y)
    xs = resolve_schedule(bx, args.schedule_x)
    ys = resolve_schedule(by, args.schedule_y)
    inclusion = load_point_map(args.map_i, ys.ground, xs.ground)
    retraction = load_point_map(args.map_r, xs.ground, ys.ground)
    from .coarse import check_coarse_retract

    rr = check_coarse_retract(inclusion, retraction, xs, ys, equivalence=args.equivalence)
    doc = {
        "format": 1,
        "kind": "retract_report",
        "retract": rr.retract,
        "closeness_stage": rr.closeness_stage,
        "inclusion_witnesses": list(rr.inclusion_bornologous.table),
        "retraction_witnesses": list(rr.retraction_bornologous.table),
    }
    if args.equivalence:
        doc["equivalence"] = rr.equivalence
        doc["closeness_stage_x"] = rr.closeness_stage_x
    if args.degree is not None and rr.retract:
        transfer = retract_transfer_experiment(
            inclusion, retraction, xs, ys, args.degree,
            coeff=Coefficients.parse(args.coeff))
        doc["transfer"] = {
            "x_complete": transfer.x_certificate.complete,
            "y_complete": transfer.y_certificate.complete,
            "implication_holds": transfer.implication_holds,
            "explanation": transfer.explanation,
            "stages": [
                {"stage": s.stage, "pushed_stage": s.pushed_stage, "x_witness": s.x_witness,
                 "bound": s.predicted_bound, "actual": s.actual, "ok": s.ok, "note": s.note}
                for s in transfer.stages
            ],
        }
    _emit(doc, args.out)
    return EXIT_OK if rr.retract else EXIT_INCOMPLETE


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr,
                        format="coarsec: %(levelname)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    handlers = {
        "certify": _cmd_certify,
        "compare": _cmd_compare,
        "build": _cmd_build,
        "subdivide": _cmd_subdivide,
        "retract-check": _cmd_retract_check,
    }
    try:
        return handlers[args.command](args)
    except (CoarsecError, OSError, ValueError) as exc:
        print(f"coarsec: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
