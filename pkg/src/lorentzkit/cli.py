"""Command-line front end.

Subcommands: catalog, analyze, classify, check, gs, perturb, geodesic.
Reports are JSON on stdout (CSV for family tables with --format csv);
exit code 0 means every requested verdict holds, 1 means a check was
violated or a computation failed (details embedded in the report), 2 means
a usage or input error (message on stderr).

Reports are deterministic for a fixed --seed; wall time is only included
when --timing is passed, so default reports are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
import time

import numpy as np

from . import __version__, catalog
from .conditions import (Region, gs_trace, inclusion_audit, ricci_condition,
                         riem_condition, temporal_certificate, tidal_condition)
from .errors import LorentzkitError
from .geodesics import geodesic, parallel_transport
from .geometry import Tolerances, curvature_data, signature
from .perturb import positivity_exit_family, trapped_exit_family
from .specfile import load_spec, spec_digest
from .submanifold import classify_trapped

_CHECK_NAMES = ("E", "SE", "P", "FP", "O", "inclusions", "orientation",
                "temporal")


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad vector {text!r}: {exc}") from exc


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise argparse.ArgumentTypeError(f"--param needs name=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = float(v)
    return out


def _parse_box(text: str, bundle) -> tuple | None:
    if text == "default":
        return None
    intervals = []
    for part in text.split(","):
        if ":" not in part:
            raise argparse.ArgumentTypeError(
                f"region interval {part!r} must be lo:hi")
        lo, hi = part.split(":", 1)
        intervals.append((float(lo), float(hi)))
    if len(intervals) != bundle.field.dim:
        raise argparse.ArgumentTypeError(
            f"region needs {bundle.field.dim} intervals")
    return tuple(intervals)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


def _emit(report: dict, out) -> None:
    json.dump(report, out, indent=2, sort_keys=True, default=_json_default)
    out.write("\n")


def _family_csv(summary: dict, out) -> None:
    out.write("n,certificate,closed_form,printed,deviation,sign_ok,c0,c1,c2\n")
    sem = {row["n"]: row for row in summary["seminorms"]}

    def fmt(x) -> str:
        return "" if x == "" else repr(float(x))

    for cert in summary["certificates"]:
        row = sem.get(cert["n"], {})
        out.write(
            f"{cert['n']},{fmt(cert['certificate'])},{fmt(cert['closed_form'])},"
            f"{fmt(cert['printed'])},{fmt(cert['deviation'])},{cert['sign_ok']},"
            f"{fmt(row.get('c0', ''))},{fmt(row.get('c1', ''))},"
            f"{fmt(row.get('c2', ''))}\n")


def _common_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # present on the top-level parser with real defaults and on every
    # subparser with SUPPRESS, so flags work on either side of the subcommand
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int,
                        default=d if suppress else 0,
                        help="seed for all sampling (default 0)")
    parser.add_argument("--jobs", type=int,
                        default=d if suppress else 1,
                        help="parallel workers for sampling (output identical)")
    parser.add_argument("--param", action="append", metavar="NAME=VALUE",
                        default=d if suppress else None,
                        help="override a spacetime parameter (repeatable)")
    parser.add_argument("--format", choices=("json", "csv"),
                        default=d if suppress else "json")
    parser.add_argument("--timing", action="store_true",
                        default=d if suppress else False,
                        help="include wall time in the report (breaks "
                             "byte-for-byte reproducibility)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lorentzkit",
        description="numerical Lorentzian geometry: curvature, trapped "
                    "submanifolds, condition checks, perturbation families")
    _common_flags(ap, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _common_flags(common, suppress=True)
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", help="list builtin spacetimes", parents=[common])

    p = sub.add_parser("analyze", help="curvature snapshot at a point",
                       parents=[common])
    p.add_argument("spec")
    p.add_argument("--at", required=True, type=_parse_vector)

    p = sub.add_parser("classify", parents=[common],
                       help="trapped classification of a submanifold")
    p.add_argument("spec")
    p.add_argument("--submanifold", required=True)

    p = sub.add_parser("check", help="condition check over a region",
                       parents=[common])
    p.add_argument("spec")
    p.add_argument("--condition", required=True, choices=_CHECK_NAMES)
    p.add_argument("--region", default="default")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--points", type=int, default=40)
    p.add_argument("--dirs", type=int, default=16)

    p = sub.add_parser("gs", help="curvature trace along a normal geodesic",
                       parents=[common])
    p.add_argument("spec")
    p.add_argument("--submanifold", required=True)
    p.add_argument("--at", required=True, type=_parse_vector,
                   help="parameter point on the submanifold")
    p.add_argument("--dir", required=True, type=_parse_vector,
                   help="future causal normal velocity (chart components)")
    p.add_argument("--length", type=float, default=1.0)

    p = sub.add_parser("perturb", help="conformal exit-family certificates",
                       parents=[common])
    p.add_argument("spec")
    p.add_argument("--theorem", required=True, choices=("3.3", "4.2"),
                   help="3.3: trapped-exit family; 4.2: positivity-exit family")
    p.add_argument("--submanifold", help="needed for --theorem 3.3")
    p.add_argument("--at", required=True, type=_parse_vector,
                   help="parameter point (3.3) or chart point (4.2)")
    p.add_argument("--witness", nargs="*", default=[],
                   metavar="v=..|w=..", help="witness vectors for 4.2")
    p.add_argument("--nmax", type=int, default=8)

    p = sub.add_parser("geodesic", help="integrate a geodesic",
                       parents=[common])
    p.add_argument("spec")
    p.add_argument("--from", dest="start", required=True, type=_parse_vector)
    p.add_argument("--dir", required=True, type=_parse_vector)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--transport", type=str, default=None,
                   help="semicolon-separated vectors to transport")
    return ap


def _cmd_catalog(args, out) -> int:
    _emit({"command": "catalog", "builtins": catalog.names(),
           "tool_version": __version__}, out)
    return 0


def _base_report(args, bundle, overrides) -> dict:
    rep = {
        "tool_version": __version__,
        "command": args.command,
        "input": bundle.name,
        "input_digest": spec_digest(args.spec, overrides),
        "seed": args.seed,
        "tolerances": Tolerances().as_dict(),
    }
    return rep


def _cmd_analyze(args, bundle, overrides, out) -> int:
    p = args.at
    data = curvature_data(bundle.field, p)
    rep = _base_report(args, bundle, overrides)
    rep.update({
        "point": p.tolist(),
        "signature_index": signature(bundle.field, p),
        "christoffel": data.gamma.tolist(),
        "riemann": data.riem.tolist(),
        "ricci": data.ric.tolist(),
        "ricci_scalar": data.scalar(),
        "kretschmann": data.kretschmann(),
    })
    _emit(rep, out)
    return 0


def _cmd_classify(args, bundle, overrides, out) -> int:
    if args.submanifold not in bundle.submanifolds:
        raise LorentzkitError(
            f"no submanifold {args.submanifold!r} in {bundle.name}; "
            f"available: {sorted(bundle.submanifolds)}")
    emb = bundle.submanifolds[args.submanifold]
    hint = bundle.hints.get(args.submanifold)
    verdict = classify_trapped(bundle.field, bundle.orientation, emb, hint)
    rep = _base_report(args, bundle, overrides)
    rep["submanifold"] = args.submanifold
    rep["verdict"] = verdict.summary()
    _emit(rep, out)
    return 0


def _cmd_check(args, bundle, overrides, out) -> int:
    box = _parse_box(args.region, bundle) or bundle.default_box
    region = Region(box=box, n_points=args.points, n_dirs=args.dirs,
                    seed=args.seed)
    name = args.condition
    rep = _base_report(args, bundle, overrides)
    rep["requested"] = name
    ok = True
    if name in ("E", "SE"):
        r = ricci_condition(bundle.field, region, strict=(name == "SE"),
                            jobs=args.jobs)
        ok = r.satisfied_strictly if (name == "SE" or args.strict) \
            else r.satisfied_weakly
        rep["result"] = r.to_dict()
    elif name in ("P", "FP"):
        r = riem_condition(bundle.field, region, strict=(name == "P"),
                           jobs=args.jobs)
        ok = r.satisfied_strictly if (name == "P" or args.strict) \
            else r.satisfied_weakly
        rep["result"] = r.to_dict()
    elif name == "O":
        r = tidal_condition(bundle.field, region, jobs=args.jobs)
        ok = r.satisfied_strictly if args.strict else r.satisfied_weakly
        rep["result"] = r.to_dict()
    elif name == "inclusions":
        r = inclusion_audit(bundle.field, region, jobs=args.jobs)
        ok = r["verdict"] == "consistent"
        rep["result"] = r
    elif name == "orientation":
        r = temporal_certificate(bundle.field, bundle.orientation,
                                 "orientation", region)
        ok = r["verdict"] == "PASSED"
        rep["result"] = r
    elif name == "temporal":
        if bundle.temporal is None:
            raise LorentzkitError(f"{bundle.name} declares no temporal function")
        r = temporal_certificate(bundle.field, bundle.temporal, "temporal",
                                 region)
        ok = r["verdict"] == "PASSED"
        rep["result"] = r
    rep["satisfied"] = ok
    _emit(rep, out)
    return 0 if ok else 1


def _cmd_gs(args, bundle, overrides, out) -> int:
    emb = bundle.submanifolds[args.submanifold]
    rep = _base_report(args, bundle, overrides)
    rep["result"] = gs_trace(bundle.field, emb, args.at, args.dir, args.length)
    rep["satisfied"] = rep["result"]["min_trace"] >= -Tolerances().tau_cond
    _emit(rep, out)
    return 0 if rep["satisfied"] else 1


def _cmd_perturb(args, bundle, overrides, out) -> int:
    if args.theorem == "3.3":
        if not args.submanifold:
            raise LorentzkitError("--theorem 3.3 needs --submanifold")
        emb = bundle.submanifolds[args.submanifold]
        fam = trapped_exit_family(bundle.field, bundle.orientation, emb,
                                  args.at, n_max=args.nmax)
    else:
        witness = {}
        for item in args.witness:
            if "=" not in item:
                raise LorentzkitError(f"witness entries look like v=1,0,0,0; "
                                      f"got {item!r}")
            k, v = item.split("=", 1)
            witness[k.strip()] = _parse_vector(v)
        if "v" not in witness or "w" not in witness:
            raise LorentzkitError("--theorem 4.2 needs --witness v=.. w=..")
        fam = positivity_exit_family(bundle.field, args.at, witness["v"],
                                     witness["w"], n_max=args.nmax)
    summary = fam.summary()
    all_signed = all(c.sign_ok for c in fam.certificates)
    if args.format == "csv":
        _family_csv(summary, out)
        return 0 if all_signed else 1
    rep = _base_report(args, bundle, overrides)
    rep["family"] = summary
    rep["satisfied"] = all_signed
    _emit(rep, out)
    return 0 if all_signed else 1


def _cmd_geodesic(args, bundle, overrides, out) -> int:
    sol = geodesic(bundle.field, args.start, args.dir, args.length)
    samples = [{"s": s, "point": x.tolist(),
                "canonical_point": bundle.field.canonicalize(x).tolist(),
                "velocity": xd.tolist()}
               for s, x, xd in sol.samples(33)]
    rep = _base_report(args, bundle, overrides)
    rep["result"] = {
        "length_requested": args.length,
        "length_reached": sol.t_reached,
        "chart_exit": sol.chart_exit,
        "norm_drift": sol.norm_drift,
        "samples": samples,
    }
    if args.transport:
        vecs = np.array([_parse_vector(v) for v in args.transport.split(";")]).T
        tr = parallel_transport(bundle.field, sol, vecs)
        rep["result"]["transport"] = {
            "product_drift": tr.product_drift,
            "final": tr.evaluate(sol.t_reached).tolist(),
        }
    _emit(rep, out)
    return 0


def run(argv: list[str], out=None) -> int:
    """Entry point used by tests; returns the exit code."""
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    t0 = time.time()
    try:
        overrides = _parse_params(args.param)
        if args.command == "catalog":
            return _cmd_catalog(args, out)
        bundle = load_spec(args.spec, overrides)
        handler = {
            "analyze": _cmd_analyze,
            "classify": _cmd_classify,
            "check": _cmd_check,
            "gs": _cmd_gs,
            "perturb": _cmd_perturb,
            "geodesic": _cmd_geodesic,
        }[args.command]
        if args.timing:
            buf = io.StringIO()
            code = handler(args, bundle, overrides, buf)
            rep = json.loads(buf.getvalue()) if args.format == "json" else None
            if rep is not None:
                rep["wall_time_s"] = round(time.time() - t0, 3)
                _emit(rep, out)
            else:
                out.write(buf.getvalue())
            return code
        return handler(args, bundle, overrides, out)
    except (OSError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LorentzkitError as exc:
        _emit({"error": str(exc), "error_type": type(exc).__name__,
               "command": args.command}, out)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))
