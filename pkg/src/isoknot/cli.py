"""Command-line front end.

Subcommands: curvature, inscribe, converge, tube, push-demo, export.  JSON
reports print to stdout and validate against the schemas shipped with the
package; with --out DIR the delimited outputs (JSON, CSV, OBJ) and rendered
PNG figures land in that directory.

Exit codes: 0 success, 2 validation error, 3 criteria not met, 4 internal
invariant breach.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from importlib import resources

import jsonschema

from .curves import (
    CurveSource,
    ParamWindow,
    circle,
    helix,
    line_segment,
    load_polyline_csv,
    polyline_as_curve,
    save_polyline_csv,
    torus_knot,
)
from .curvature import piecewise_total_curvature
from .certify import certify_approximant, find_isotopy_index, partition_curve
from .errors import (
    CriteriaNotMetError,
    CurveValidationError,
    InternalInvariantError,
    NotSimpleError,
    QuadratureError,
)
from .inscribe import pl_representation, refine_midpoints, seed_inscription
from .offsets import offset_approximant, offset_curve
from .pushes import push_monotone_check, push_trace, save_trace_obj
from .tube import disk_pair_witness, tube_radius

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CRITERIA = 3
EXIT_INTERNAL = 4


# ---------------------------------------------------------------------------
# curve specs
# ---------------------------------------------------------------------------

CURVE_KINDS = ("circle", "helix", "torus_knot", "offset_helix", "segment", "pl_file")


@dataclass(frozen=True)
class CurveSpec:
    kind: str
    params: dict
    closed: bool


_REQUIRED = {
    "circle": ("r",),
    "helix": ("a", "b", "turns"),
    "torus_knot": ("p", "q", "R", "rho"),
    "offset_helix": ("a", "b", "turns", "d"),
    "segment": (),
}

_CLOSED = {"circle": True, "torus_knot": True, "helix": False,
           "offset_helix": False, "segment": False}


def parse_curve_spec(text: str) -> CurveSpec:
    """Parse 'kind:k=v,...' (pl_file takes the rest as a path)."""
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind not in CURVE_KINDS:
        raise CurveValidationError(
            f"unknown curve kind {kind!r}; expected one of {', '.join(CURVE_KINDS)}")
    if kind == "pl_file":
        if not rest:
            raise CurveValidationError("pl_file needs a path: pl_file:PATH")
        return CurveSpec(kind, {"path": rest}, False)
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise CurveValidationError(f"bad curve parameter {item!r}")
            try:
                params[key.strip()] = float(val)
            except ValueError:
                raise CurveValidationError(f"bad numeric value in {item!r}") from None
    missing = [k for k in _REQUIRED[kind] if k not in params]
    if missing:
        raise CurveValidationError(
            f"curve kind {kind!r} needs parameters: {', '.join(missing)}")
    return CurveSpec(kind, params, _CLOSED[kind])


def build_curve(spec: CurveSpec) -> CurveSource:
    p = spec.params
    if spec.kind == "circle":
        return circle(p["r"])
    if spec.kind == "helix":
        return helix(p["a"], p["b"], turns=p["turns"])
    if spec.kind == "torus_knot":
        return torus_knot(int(p["p"]), int(p["q"]), p["R"], p["rho"])
    if spec.kind == "offset_helix":
        return offset_curve(helix(p["a"], p["b"], turns=p["turns"]), p["d"])
    if spec.kind == "segment":
        a = (p.get("ax", 0.0), p.get("ay", 0.0), p.get("az", 0.0))
        b = (p.get("bx", 1.0), p.get("by", 0.0), p.get("bz", 0.0))
        return line_segment(a, b)
    poly = load_polyline_csv(p["path"])
    return polyline_as_curve(poly)


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------

def _validate_report(doc: dict, schema_name: str) -> None:
    with resources.files("isoknot").joinpath(f"schemas/{schema_name}.json").open(
            "r", encoding="utf-8") as fh:
        schema = json.load(fh)
    jsonschema.validate(doc, schema)


def _emit(doc: dict, schema_name: str, out, filename: str) -> None:
    _validate_report(doc, schema_name)
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if out:
        path = os.path.join(out, filename)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def _out_dir(args):
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    return args.out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_curvature(args) -> int:
    curve = build_curve(parse_curve_spec(args.curve))
    lo, hi = args.window
    window = ParamWindow(lo, hi)
    tc = piecewise_total_curvature(curve, window, tol=args.tol)
    report = {
        "curve": curve.name or "curve",
        "window": [window.lo, window.hi],
        "total": tc.value,
        "smooth_part": tc.smooth_part,
        "corner_part": tc.corner_part,
    }
    out = _out_dir(args)
    _emit(report, "curvature", out, "curvature.json")
    if out:
        from . import figures
        figures.save_curvature_figure(curve, os.path.join(out, "curvature.png"))
    return EXIT_OK


def cmd_tube(args) -> int:
    curve = build_curve(parse_curve_spec(args.curve))
    kwargs = {}
    if args.grid:
        kwargs["sep_grid"] = args.grid
    tr = tube_radius(curve, safety=args.safety, **kwargs)
    report = {
        "curve": curve.name or "curve",
        "r": tr.r,
        "kappa_max": tr.kappa_max,
        "d_min": _finite_or_none(tr.d_min),
        "r_end": _finite_or_none(tr.r_end),
        "safety": tr.safety,
    }
    out = _out_dir(args)
    _emit(report, "tube", out, "tube.json")
    if args.witness:
        bad = disk_pair_witness(curve, tr.r, pairs=args.witness, seed=args.seed)
        if bad:
            raise InternalInvariantError(
                f"{bad} intersecting normal-disk pairs at r={tr.r:g}")
        print(f"disk witness: {args.witness} pairs, no intersections",
              file=sys.stderr)
    if out:
        from . import figures
        figures.save_tube_figure(tr, os.path.join(out, "tube.png"))
    return EXIT_OK


def cmd_inscribe(args) -> int:
    curve = build_curve(parse_curve_spec(args.curve))
    r = tube_radius(curve, safety=args.safety)
    poly, cert = pl_representation(curve, r, eps=args.eps,
                                   max_rounds=args.max_rounds)
    doc = cert.to_json_dict()
    out = _out_dir(args)
    _emit(doc, "certificate", out, "certificate.json")
    if out:
        csv_path = os.path.join(out, "polyline.csv")
        save_polyline_csv(poly, csv_path)
        from . import figures
        figures.save_overlay_figure(curve, poly, os.path.join(out, "overlay.png"),
                                    title=curve.name or "curve")
        figures.save_margin_figure(cert, os.path.join(out, "margins.png"))
        print(f"wrote {csv_path}", file=sys.stderr)
    if not cert.passed:
        raise CriteriaNotMetError("inscribed certificate failed")
    return EXIT_OK


def _refinement_sequence(curve: CurveSource):
    states = [seed_inscription(curve)]

    def fetch(i: int):
        while len(states) < i:
            states.append(refine_midpoints(states[-1]))
        return states[i - 1].polyline

    return fetch


def _offset_sequence(spec: CurveSpec, safety: float, eps: float):
    base = helix(spec.params["a"], spec.params["b"], turns=spec.params["turns"])

    def fetch(i: int):
        omega_i = offset_approximant(base, i)
        r_i = tube_radius(omega_i, safety=safety)
        poly, _ = pl_representation(omega_i, r_i, eps=eps)
        return poly

    return fetch


def cmd_converge(args) -> int:
    spec = parse_curve_spec(args.curve)
    if args.sequence == "offset":
        if spec.kind not in ("helix", "offset_helix"):
            raise CurveValidationError(
                "offset sequence needs a helix or offset_helix curve")
        target = offset_curve(
            helix(spec.params["a"], spec.params["b"], turns=spec.params["turns"]),
            spec.params.get("d", 1.0))
        fetch = _offset_sequence(spec, args.safety, args.eps)
    else:
        target = build_curve(spec)
        fetch = _refinement_sequence(target)
    r = tube_radius(target, safety=args.safety)
    partition = partition_curve(target, r)
    history = []

    def on_certificate(i, cert):
        history.append((i, cert.min_margin()))

    result = None
    if args.i_max >= 1:
        result = find_isotopy_index(partition, target, fetch, args.i_max, r,
                                    fast=args.fast, on_certificate=on_certificate)
    report = {
        "curve": target.name or "curve",
        "sequence": args.sequence,
        "i_max": args.i_max,
        "r": r.r,
        "found": bool(result and result.found),
        "index": result.index if result else None,
        "best_index": result.best_index if result else 0,
        "best_margin": _finite_or_none(result.best_margin) if result else None,
        "tried": result.tried if result else 0,
    }
    out = _out_dir(args)
    _emit(report, "converge", out, "converge.json")
    if out and history:
        from . import figures
        figures.save_convergence_figure(
            [h[0] for h in history], [h[1] for h in history],
            os.path.join(out, "convergence.png"),
            found=result.index if result else None)
    if not report["found"]:
        raise CriteriaNotMetError(
            f"no index up to {args.i_max} passed certification")
    return EXIT_OK


def cmd_push_demo(args) -> int:
    poly = load_polyline_csv(args.pl_file)
    trace = push_trace(poly, args.vertex, steps=args.steps)
    out = _out_dir(args)
    obj_path = os.path.join(out or ".", "push_trace.obj")
    save_trace_obj(trace, obj_path)
    ok, violation = push_monotone_check(poly, args.vertex, steps=args.steps)
    print(f"wrote {len(trace)}-frame trace to {obj_path} "
          f"(curvature nonincreasing: {ok}, max increase {violation:.3g})")
    if out:
        from . import figures
        figures.save_push_figure(trace, os.path.join(out, "push.png"))
    if not ok:
        raise InternalInvariantError("median push increased total curvature")
    return EXIT_OK


def cmd_export(args) -> int:
    spec = parse_curve_spec(args.curve)
    if spec.kind == "pl_file":
        poly = load_polyline_csv(spec.params["path"])
    else:
        curve = build_curve(spec)
        state = seed_inscription(curve)
        while state.n < args.grid:
            state = refine_midpoints(state)
        poly = state.polyline
    out = _out_dir(args)
    base = os.path.join(out or ".", "polyline")
    if args.format == "csv":
        path = base + ".csv"
        save_polyline_csv(poly, path)
    else:
        path = base + ".obj"
        save_trace_obj([poly], path)
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _window_arg(text: str):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("window must be LO,HI") from None
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="isoknot",
        description="Total curvature, certified PL approximation, and "
                    "isotopic convergence testing for space curves.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, curve=True):
        if curve:
            p.add_argument("--curve", required=True,
                           help="curve spec kind:k=v,... "
                                f"(kinds: {', '.join(CURVE_KINDS)})")
        p.add_argument("--out", default=None,
                       help="directory for files and figures")

    p = sub.add_parser("curvature", help="total curvature of a curve")
    add_common(p)
    p.add_argument("--window", type=_window_arg, default=(0.0, 1.0),
                   help="parameter window LO,HI (default 0,1)")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="quadrature tolerance (default 1e-9)")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("tube", help="tube radius bounds")
    add_common(p)
    p.add_argument("--safety", type=float, default=0.9,
                   help="safety factor in (0,1) (default 0.9)")
    p.add_argument("--grid", type=int, default=None,
                   help="separation-scan grid override")
    p.add_argument("--witness", type=int, default=0,
                   help="also test this many random normal-disk pairs")
    p.add_argument("--seed", type=int, default=0, help="witness RNG seed")
    p.set_defaults(func=cmd_tube)

    p = sub.add_parser("inscribe", help="certified PL representation")
    add_common(p)
    p.add_argument("--eps", type=float, default=0.1,
                   help="curvature budget slack in radians (default 0.1)")
    p.add_argument("--safety", type=float, default=0.9,
                   help="tube safety factor (default 0.9)")
    p.add_argument("--max-rounds", type=int, default=24,
                   help="refinement round cap (default 24)")
    p.set_defaults(func=cmd_inscribe)

    p = sub.add_parser("converge", help="find the isotopy index of a sequence")
    add_common(p)
    p.add_argument("--sequence", choices=("refinement", "offset"),
                   default="refinement", help="approximant sequence kind")
    p.add_argument("--i-max", type=int, default=64,
                   help="largest index to try (default 64)")
    p.add_argument("--eps", type=float, default=0.1,
                   help="budget slack for PL representations (default 0.1)")
    p.add_argument("--safety", type=float, default=0.9,
                   help="tube safety factor (default 0.9)")
    p.add_argument("--fast", action="store_true",
                   help="short-circuit failing windows")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("push-demo", help="median push trace as OBJ")
    p.add_argument("pl_file", help="polyline CSV file")
    p.add_argument("--vertex", type=int, required=True, help="vertex index")
    p.add_argument("--steps", type=int, default=50,
                   help="frame count (default 50)")
    p.add_argument("--out", default=None, help="directory for files and figures")
    p.set_defaults(func=cmd_push_demo)

    p = sub.add_parser("export", help="write a curve as CSV or OBJ")
    add_common(p)
    p.add_argument("--format", choices=("csv", "obj"), default="csv")
    p.add_argument("--grid", type=int, default=256,
                   help="minimum vertex count for parametric curves")
    p.set_defaults(func=cmd_export)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CurveValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CriteriaNotMetError, NotSimpleError) as exc:
        print(f"criteria not met: {exc}", file=sys.stderr)
        return EXIT_CRITERIA
    except (InternalInvariantError, QuadratureError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
