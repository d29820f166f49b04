"""Command-line frontend: build surfaces, plot curves, compare parametrizations.

Exit codes: 0 success, 1 data or construction error, 2 usage error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import mesh as qm
from . import splines as sp
from . import surface as sf
from .errors import (ConstructionError, DegenerateEdgeError,
                     MeshStructureError, UnsupportedFaceError,
                     UnsupportedMeshError)

DATA_ERRORS = (ConstructionError, DegenerateEdgeError, MeshStructureError,
               UnsupportedFaceError, UnsupportedMeshError, OSError,
               ValueError)


class UsageError(Exception):
    """Bad invocation detectable before any real work."""


def _add_common_flags(p):
    p.add_argument("--family", default="d5c2p2s4",
                   choices=sorted(sp.FAMILIES))
    p.add_argument("--samples", type=int, default=16,
                   help="tessellation/sampling density per patch edge")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="quadspline",
        description="Interpolating spline surfaces on quad meshes")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="interpolate a quad mesh")
    b.add_argument("input", help="quad-only OBJ file")
    _add_common_flags(b)
    b.add_argument("--mode", default="g2", choices=("g1", "g2"))
    b.add_argument("--param", default="centripetal",
                   choices=("uniform", "chordal", "centripetal", "mean"))
    b.add_argument("--alpha", type=float, default=None,
                   help="override the parametrization exponent")
    b.add_argument("--r-degree", type=int, default=2, choices=(1, 2))
    b.add_argument("--out", default=None, help="output PLY path")
    b.add_argument("--report", default=None, help="continuity report JSON")
    b.add_argument("--config", default=None,
                   help="JSON file with flag defaults (flags win)")

    c = sub.add_parser("curve", help="interpolate a planar polyline")
    c.add_argument("input", help="text file with one 'x y' pair per line")
    _add_common_flags(c)
    c.add_argument("--param", default="centripetal",
                   choices=("uniform", "chordal", "centripetal"))
    c.add_argument("--alpha", type=float, default=None)
    c.add_argument("--open", dest="closed", action="store_false",
                   help="treat the polyline as open")
    c.add_argument("--out", default=None, help="output prefix (.csv/.svg)")

    m = sub.add_parser("compare",
                       help="per-edge versus ribbon-averaged parameters")
    m.add_argument("input")
    _add_common_flags(m)
    m.add_argument("--mode", default="g2", choices=("g1", "g2"))
    m.add_argument("--out", default=None, help="output prefix")
    return parser, {"build": b, "curve": c, "compare": m}


def _apply_config(subparsers, argv):
    """Seed the build parser's defaults from --config; explicit flags win."""
    if "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return
    with open(argv[idx + 1], "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    build = subparsers["build"]
    known = {a.dest for a in build._actions}
    bad = set(cfg) - known
    if bad:
        raise ValueError(f"unknown config keys: {sorted(bad)}")
    build.set_defaults(**cfg)


def cmd_build(args):
    mesh = qm.load_obj(args.input)
    mesh.build_connectivity()
    options = sf.BuildOptions(family=args.family, mode=args.mode,
                              param_method=args.param, alpha=args.alpha,
                              r_degree=args.r_degree)
    surf = sf.build_surface(mesh, options)
    tri = sf.tessellate(surf, args.samples)
    sf.analysis_fields(surf, tri)
    report = sf.continuity_report(surf)

    stem = Path(args.input).with_suffix("")
    out = Path(args.out) if args.out else Path(f"{stem}.ply")
    report_path = Path(args.report) if args.report else \
        Path(f"{stem}.report.json")
    sf.export_ply(tri, out, channels=("mean_curvature", "isophote"))
    sf.write_report(report, report_path)
    print(f"wrote {out} ({len(tri.positions)} vertices, "
          f"{len(tri.triangles)} triangles) and {report_path}")
    return 0


def load_points_file(path):
    pts = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            pts.append([float(parts[0]), float(parts[1])])
    return np.asarray(pts)


def curvature_profile(curve, samples):
    """(x, position, signed curvature) rows along the whole curve."""
    lo, hi = curve.domain()
    xs = np.linspace(lo, hi, samples, endpoint=not curve.closed)
    rows = []
    for x in xs:
        p = curve.eval(x)
        rows.append((float(x), p, sp.signed_curvature(curve, float(x))))
    return rows


def count_sign_changes(values, rel_tol=1e-9):
    vals = np.asarray(values, float)
    scale = np.abs(vals).max() if len(vals) else 0.0
    if scale == 0.0:
        return 0
    signs = [v for v in vals if abs(v) > rel_tol * scale]
    changes = 0
    for a, b in zip(signs, signs[1:]):
        if (a > 0) != (b > 0):
            changes += 1
    return changes


def write_curve_csv(rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,px,py,curvature\n")
        for x, p, kappa in rows:
            fh.write(f"{x:.12g},{p[0]:.12g},{p[1]:.12g},{kappa:.12g}\n")


def write_curve_svg(rows, points, path, comb_scale=0.25):
    pts = np.array([p for _x, p, _k in rows])
    kap = np.array([k for _x, _p, k in rows])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = max(float((hi - lo).max()), 1e-12)

    def map_pt(p):
        q = (p - lo) / span * 800.0 + 50.0
        return q[0], 900.0 - q[1]

    kmax = max(abs(kap).max(), 1e-12)
    lines = ['<svg xmlns="http://www.w3.org/2000/svg" '
             'width="900" height="950">']
    poly = " ".join("%.2f,%.2f" % map_pt(p) for p in pts)
    lines.append(f'<polyline points="{poly}" fill="none" stroke="black"/>')
    # curvature comb: offset along the curve normal
    for i in range(len(pts)):
        j = (i + 1) % len(pts)
        tang = pts[j] - pts[i - 1]
        nrm = np.array([-tang[1], tang[0]])
        ln = np.linalg.norm(nrm)
        if ln == 0:
            continue
        tip = pts[i] + nrm / ln * (kap[i] / kmax) * span * comb_scale
        x0, y0 = map_pt(pts[i])
        x1, y1 = map_pt(tip)
        lines.append(f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" '
                     f'y2="{y1:.2f}" stroke="crimson" stroke-width="0.5"/>')
    ctrl = " ".join("%.2f,%.2f" % map_pt(p) for p in points)
    lines.append(f'<polyline points="{ctrl}" fill="none" stroke="steelblue" '
                 'stroke-dasharray="4 3"/>')
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_curve(args):
    pts = load_points_file(args.input)
    fam = sp.family(args.family)
    need = fam.support if args.closed else fam.support + 1
    if len(pts) < need:
        raise UsageError(f"need at least {need} points, got {len(pts)}")
    alphas = {"uniform": 0.0, "chordal": 1.0, "centripetal": 0.5}
    alpha = alphas[args.param] if args.alpha is None else args.alpha
    curve = sp.PolylineCurve.from_points(pts, fam, alpha=alpha,
                                         closed=args.closed)
    rows = curvature_profile(curve, max(args.samples, 3))
    stem = args.out or str(Path(args.input).with_suffix(""))
    write_curve_csv(rows, f"{stem}.csv")
    write_curve_svg(rows, pts, f"{stem}.svg")
    changes = count_sign_changes([k for _x, _p, k in rows])
    print(f"wrote {stem}.csv and {stem}.svg; "
          f"curvature sign changes: {changes}")
    return 0


def section_sign_changes(mesh, params, fam, samples=200):
    """Total curvature sign changes over all closed section curves.

    Curves are projected to their best-fit plane, where a signed curvature
    is well defined; open polylines are skipped.
    """
    total = 0
    for poly in qm.trace_section_polylines(mesh):
        if not poly.closed:
            continue
        curve = qm.section_polyline_curve(mesh, params, poly, fam)
        pts = curve.points - curve.points.mean(axis=0)
        _u, _s, vt = np.linalg.svd(pts, full_matrices=False)
        basis = vt[:2]
        flat = sp.PolylineCurve(curve.points @ basis.T, curve.knots, fam,
                                closed=True)
        lo, hi = flat.domain()
        ks = [sp.signed_curvature(flat, x)
              for x in np.linspace(lo, hi, samples, endpoint=False)]
        total += count_sign_changes(ks)
    return total


def cmd_compare(args):
    mesh = qm.load_obj(args.input)
    mesh.build_connectivity()
    fam = sp.family(args.family)
    results = {}
    tris = {}
    for label, method in (("augmented", "centripetal"), ("mean", "mean")):
        params = qm.assign_edge_params(mesh, method)
        options = sf.BuildOptions(family=fam, mode=args.mode,
                                  param_method=method)
        surf = sf.build_surface(mesh, options, params=params)
        tri = sf.tessellate(surf, args.samples)
        sf.analysis_fields(surf, tri)
        report = sf.continuity_report(surf)
        curv = tri.channels["mean_curvature"]
        finite = curv[np.isfinite(curv)]
        results[label] = {
            "section_sign_changes": section_sign_changes(mesh, params, fam),
            "continuity": report["summary"],
            "mean_curvature": {"min": float(finite.min()),
                               "max": float(finite.max())},
        }
        tris[label] = tri

    delta = np.linalg.norm(
        tris["augmented"].positions[:len(tris["mean"].positions)]
        - tris["mean"].positions[:len(tris["augmented"].positions)], axis=1) \
        if len(tris["augmented"].positions) == len(tris["mean"].positions) \
        else None
    results["position_delta"] = (
        {"max": float(delta.max()), "mean": float(delta.mean())}
        if delta is not None else None)

    stem = args.out or str(Path(args.input).with_suffix(""))
    for label, tri in tris.items():
        sf.export_ply(tri, f"{stem}.{label}.ply",
                      channels=("mean_curvature", "isophote"))
    with open(f"{stem}.compare.json", "w", encoding="utf-8") as fh:
        json.dump(results, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {stem}.augmented.ply, {stem}.mean.ply, "
          f"{stem}.compare.json")
    return 0


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = make_parser()
    try:
        _apply_config(subparsers, argv)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    if getattr(args, "mode", None) == "g2" \
            and sp.family(args.family).continuity < 2:
        print(f"error: g2 mode requires a C2 family; {args.family} is not",
              file=sys.stderr)
        return 2
    try:
        if args.command == "build":
            return cmd_build(args)
        if args.command == "curve":
            return cmd_curve(args)
        return cmd_compare(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
