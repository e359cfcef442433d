"""Command-line entry point.

Exit codes: 0 success, 2 parse error, 3 no lightlike points, 4 degenerate
lightlike point encountered, 5 verdict precondition failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (AsymptoticFit, BoundednessVerdict, PreconditionError, asymptotic_fit,
                       boundedness_verdict, gauss_bonnet, shape_class)
from .classify import (CurveClassification, DeltaData, Kind, NullField, classify_curve,
                       compute_null_field, delta_function)
from .expr import EvaluationError, ExprError, SurfaceDef, load_surface
from .invariants import InvariantError, InvariantSample, invariants_at
from .locus import LocusCurve, TraceError, find_loci
from .monge import build_monge, monge_text, parse_coeffs
from .surface import curvature_field, grid_points

EXIT_OK, EXIT_PARSE, EXIT_NO_LOCUS, EXIT_DEGENERATE, EXIT_PRECONDITION = 0, 2, 3, 4, 5


def fmt(x) -> str:
    """Deterministic CSV number formatting; None becomes an empty cell."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(fmt(x) for x in r) + "\n")
    return buf.getvalue()


@dataclass
class CurveResult:
    curve: LocusCurve
    nf: NullField
    delta: DeltaData
    classes: CurveClassification
    table: list[InvariantSample]
    asymptotics: list = field(default_factory=list)


@dataclass
class Analysis:
    surface: SurfaceDef
    curves: list[CurveResult]
    verdict: BoundednessVerdict | None
    gauss_bonnet: dict | None


def _map(fn, items, threads):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def run_analysis(s: SurfaceDef, grid: int = 64, step: float | None = None, tol: float = 1e-6,
                 threads: int = 1, every: int = 1, with_gauss_bonnet: bool = True) -> Analysis:
    curves = find_loci(s, grid, step)
    results = []
    for c in curves:
        nf = compute_null_field(s, c)
        delta = delta_function(c, nf)
        cc = classify_curve(c, nf, delta, tol)
        idx = [i for i in range(0, len(c), every) if cc.samples[i].kind is Kind.FIRST_KIND]

        def one(i, c=c):
            try:
                return invariants_at(s, c.points[i], c.tangent[i], c.t[i], c.s[i])
            except InvariantError:
                return None

        table = [r for r in _map(one, idx, threads) if r is not None]
        res = CurveResult(c, nf, delta, cc, table)
        for p in cc.second_kind:
            if p.cls.kind in (Kind.LK, Kind.ADMISSIBLE_SECOND_KIND):
                try:
                    res.asymptotics.append(asymptotic_fit(s, c, nf, delta, p.t, tol_rel=tol).as_dict())
                except PreconditionError as exc:
                    res.asymptotics.append({"t_star": p.t, "class": p.cls.label, "error": str(exc)})
        results.append(res)
    verdict = boundedness_verdict([r.table for r in results], [r.classes for r in results], tol) if results else None
    gb = None
    if with_gauss_bonnet and results and s.u_periodic and s.v_periodic:
        try:
            gb = gauss_bonnet(s, verdict, curves, threads=threads).as_dict()
        except PreconditionError as exc:
            gb = {"error": str(exc)}
    return Analysis(s, results, verdict, gb)


def report_dict(a: Analysis) -> dict:
    hist: dict[str, int] = {}
    for r in a.curves:
        for k, v in r.classes.histogram().items():
            hist[k] = hist.get(k, 0) + v
    v = a.verdict
    curves = []
    for i, r in enumerate(a.curves):
        shapes: dict[str, int] = {}
        for row in r.table:
            key = shape_class(row).value
            shapes[key] = shapes.get(key, 0) + 1
        curves.append({
            "index": i,
            "samples": len(r.curve),
            "closed": r.curve.closed,
            "nondegenerate": r.curve.nondegenerate,
            "status": r.curve.status,
            "step": r.curve.h,
            "image_length": float(r.curve.s[-1]),
            "classes": r.classes.histogram(),
            "second_kind": [{"t": p.t, "u": float(p.point[0]), "v": float(p.point[1]),
                             "class": p.cls.label, "k": p.cls.k} for p in r.classes.second_kind],
            "shape": dict(sorted(shapes.items())),
        })
    return {
        "schema": 1,
        "tool": f"mixedsurf {__version__}",
        "surface": a.surface.name,
        "curves": curves,
        "bounded": None if v is None else v.bounded,
        "bounded_reason": None if v is None else v.reason,
        "max_kappa_L": None if v is None else v.max_kappa_L,
        "max_kN_minus_kB": None if v is None else v.max_kN_minus_kB,
        "offending": [] if v is None else v.offending,
        "classes": dict(sorted(hist.items())),
        "gauss_bonnet": a.gauss_bonnet,
        "asymptotics": [dict(curve=i, **x) for i, r in enumerate(a.curves) for x in r.asymptotics],
    }


LOCUS_HEADER = ["t", "u", "v", "s", "grad_lambda_u", "grad_lambda_v"]
CLASS_HEADER = ["t", "u", "v", "delta", "class", "k"]
INV_HEADER = ["t", "s", "kappa_L", "kappa_N", "kappa_G", "kappa_B", "theta", "khat"]
FIELD_HEADER = ["u", "v", "lambda", "khat", "K", "H", "causal"]


def locus_csv(c: LocusCurve) -> str:
    return csv_text(LOCUS_HEADER, ((c.t[i], c.points[i, 0], c.points[i, 1], c.s[i], c.grad[i, 0], c.grad[i, 1])
                                   for i in range(len(c))))


def classes_csv(r: CurveResult) -> str:
    rows = [(r.curve.t[i], r.curve.points[i, 0], r.curve.points[i, 1], r.delta.values[i], pc.label, pc.k)
            for i, pc in enumerate(r.classes.samples)]
    for p in r.classes.second_kind:
        rows.append((p.t, p.point[0], p.point[1], r.delta.derivatives_at(p.t, 0)[0], p.cls.label, p.cls.k))
    rows.sort(key=lambda x: x[0])
    return csv_text(CLASS_HEADER, rows)


def invariants_csv(table: list[InvariantSample]) -> str:
    return csv_text(INV_HEADER, ((r.t, r.s, r.kappa_L, r.kappa_N, r.kappa_G, r.kappa_B, r.theta, r.khat)
                                 for r in table))


def field_csv(s: SurfaceDef, n: int, threads: int = 1) -> str:
    U, V = grid_points(s, n, n)
    rows_idx = list(range(U.shape[0]))
    parts = _map(lambda i: curvature_field(s, U[i], V[i]), rows_idx, threads)
    rows = []
    for f in parts:
        codes = f.causal_codes()
        for j in range(len(f.u)):
            ok = bool(f.defined[j])
            rows.append((f.u[j], f.v[j], f.lam[j], f.khat[j], f.K[j] if ok else None,
                         f.H[j] if ok else None, str(codes[j])))
    buf = io.StringIO()
    buf.write(",".join(FIELD_HEADER) + "\n")
    for r in rows:
        buf.write(",".join(fmt(x) for x in r[:6]) + "," + r[6] + "\n")
    return buf.getvalue()


def _write(path: Path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit(text: str, out: str | None, default_name: str):
    if out is None:
        sys.stdout.write(text)
        return
    p = Path(out)
    if p.suffix == "" or p.is_dir():
        p.mkdir(parents=True, exist_ok=True)
        p = p / default_name
    else:
        p.parent.mkdir(parents=True, exist_ok=True)
    _write(p, text)


def _load(path: str) -> SurfaceDef:
    try:
        return load_surface(path)
    except OSError as exc:
        raise ExprError(f"cannot read {path}: {exc.strerror}") from exc


def cmd_analyze(args) -> int:
    s = _load(args.surface)
    a = run_analysis(s, args.grid, args.step, args.tol, args.threads, args.every)
    if not a.curves:
        print(f"{s.name}: no lightlike points found", file=sys.stderr)
        return EXIT_NO_LOCUS
    report = report_dict(a)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "report.json", dump_json(report))
        for i, r in enumerate(a.curves):
            _write(out / f"locus_{i}.csv", locus_csv(r.curve))
            _write(out / f"classes_{i}.csv", classes_csv(r))
            _write(out / f"invariants_{i}.csv", invariants_csv(r.table))
    else:
        if args.format == "csv":
            sys.stdout.write(invariants_csv([row for r in a.curves for row in r.table]))
        else:
            sys.stdout.write(dump_json(report))
    if any(not r.curve.nondegenerate for r in a.curves):
        print("degenerate lightlike point encountered", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_field(args) -> int:
    s = _load(args.surface)
    _emit(field_csv(s, args.grid, args.threads), args.out, "field.csv")
    return EXIT_OK


def cmd_gauss_bonnet(args) -> int:
    s = _load(args.surface)
    if not (s.u_periodic and s.v_periodic):
        print("Gauss-Bonnet needs a closed surface (both directions periodic)", file=sys.stderr)
        return EXIT_PRECONDITION
    a = run_analysis(s, args.grid, args.step, args.tol, args.threads, args.every, with_gauss_bonnet=False)
    try:
        res = gauss_bonnet(s, a.verdict, [r.curve for r in a.curves], base_grid=args.base_grid,
                           threads=args.threads)
    except PreconditionError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PRECONDITION
    if args.format == "csv":
        text = csv_text(["integral", "expected", "residual"], [(res.integral, res.expected, res.residual)])
    else:
        text = dump_json({"schema": 1, "surface": s.name, "gauss_bonnet": res.as_dict()})
    _emit(text, args.out, "gauss_bonnet." + args.format)
    return EXIT_OK


def cmd_asymptotics(args) -> int:
    s = _load(args.surface)
    curves = find_loci(s, args.grid, args.step)
    if not curves:
        print(f"{s.name}: no lightlike points found", file=sys.stderr)
        return EXIT_NO_LOCUS
    if not 0 <= args.curve < len(curves):
        print(f"curve index {args.curve} out of range (found {len(curves)})", file=sys.stderr)
        return EXIT_PRECONDITION
    c = curves[args.curve]
    if not c.nondegenerate:
        print("degenerate lightlike point encountered", file=sys.stderr)
        return EXIT_DEGENERATE
    nf = compute_null_field(s, c)
    delta = delta_function(c, nf)
    if args.at is not None:
        targets = [args.at]
    else:
        targets = [p.t for p in classify_curve(c, nf, delta, args.tol).second_kind
                   if p.cls.kind in (Kind.LK, Kind.ADMISSIBLE_SECOND_KIND)]
        if not targets:
            print("no admissible second-kind point on this curve", file=sys.stderr)
            return EXIT_PRECONDITION
    fits: list[AsymptoticFit] = []
    try:
        for t in targets:
            fits.append(asymptotic_fit(s, c, nf, delta, t, args.eps_min, args.eps_max, args.tol))
    except PreconditionError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PRECONDITION
    if args.format == "csv":
        rows = [(f.t_star, f.cls, name, e.expected, e.exponent, e.rms, e.limit, e.samples)
                for f in fits for name, e in f.fits.items()]
        buf = io.StringIO()
        buf.write("t_star,class,invariant,expected_exponent,exponent,rms,limit,samples\n")
        for r in rows:
            buf.write(",".join([fmt(r[0]), r[1], r[2]] + [fmt(x) for x in r[3:]]) + "\n")
        text = buf.getvalue()
    else:
        text = dump_json({"schema": 1, "surface": s.name, "curve": args.curve,
                          "asymptotics": [f.as_dict() for f in fits]})
    _emit(text, args.out, "asymptotics." + args.format)
    return EXIT_OK


def cmd_monge_gen(args) -> int:
    try:
        with open(args.coeffs, encoding="utf-8") as fh:
            coeffs = parse_coeffs(fh.read())
    except OSError as exc:
        raise ExprError(f"cannot read {args.coeffs}: {exc.strerror}") from exc
    text = monge_text(coeffs)
    build_monge(coeffs)  # validate the generated text parses
    _emit(text, args.out, f"{coeffs.name}.surf")
    return EXIT_OK


def _positive(kind):
    def conv(text):
        x = kind(text)
        if not x > 0:
            raise argparse.ArgumentTypeError("must be positive")
        return x

    return conv


def _grid(text):
    n = int(text)
    if n < 8:
        raise argparse.ArgumentTypeError("grid must be at least 8")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=_grid, default=64, help="scan / sampling grid size N (N x N)")
    common.add_argument("--step", type=_positive(float), default=None,
                        help="trace step h (default: domain diagonal / 512)")
    common.add_argument("--tol", type=_positive(float), default=1e-6, help="relative tolerance")
    common.add_argument("--out", default=None, help="output directory (or file)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=_positive(int), default=os.cpu_count() or 1)

    p = argparse.ArgumentParser(prog="mixedsurf", description="Lightlike-point analysis of mixed type surfaces.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="trace, classify, invariants and verdicts")
    a.add_argument("surface")
    a.add_argument("--every", type=_positive(int), default=1, help="compute invariants at every k-th sample")
    a.set_defaults(func=cmd_analyze)

    f = sub.add_parser("field", parents=[common], help="curvature field CSV over a grid")
    f.add_argument("surface")
    f.set_defaults(func=cmd_field)

    g = sub.add_parser("gauss-bonnet", parents=[common], help="integral of K dA on a closed surface")
    g.add_argument("surface")
    g.add_argument("--base-grid", type=_grid, default=32)
    g.add_argument("--every", type=_positive(int), default=1)
    g.set_defaults(func=cmd_gauss_bonnet)

    s = sub.add_parser("asymptotics", parents=[common], help="divergence rates near a second-kind point")
    s.add_argument("surface")
    s.add_argument("--at", type=float, default=None, help="trace parameter t* of the second-kind point")
    s.add_argument("--curve", type=int, default=0)
    s.add_argument("--eps-min", type=_positive(float), default=1e-5)
    s.add_argument("--eps-max", type=_positive(float), default=1e-2)
    s.set_defaults(func=cmd_asymptotics)

    m = sub.add_parser("monge-gen", parents=[common], help="surface file from Monge coefficients")
    m.add_argument("coeffs")
    m.set_defaults(func=cmd_monge_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ExprError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (EvaluationError, TraceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE if isinstance(exc, TraceError) else EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
