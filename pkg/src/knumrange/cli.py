"""Command-line interface: ``knumrange <subcommand> ...``.

Exit codes: 0 success, 2 malformed input file, 3 invalid flags or argument
values, 4 degenerate pencil, 1 any other failure (for example an
unwritable output path).  Outputs are written only after every result has
been computed, each via a temp file and rename.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import serialize as S
from .errors import ArgumentError, DegeneratePencilError, DimensionError, InputError
from .linalg import commutator_norm, decompose, is_normal
from .numrange import classify, trace_boundary
from .oracle import conjecture_6_2_scan
from .pencil import char_poly_bivariate, critical_angles, discriminant_y
from .scale import build_scale, euler_characteristic, flat_faces, isotrace_slice, mesh_bytes
from .structure import complex_slope, reducing_subspaces

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_FLAGS, EXIT_DEGENERATE = 0, 1, 2, 3, 4


class _FlagError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _FlagError(message)


def boundary_doc(boundary, report) -> dict:
    rows = [[float(t), float(r), *S.cpair(p[0]), *S.cpair(p[m - 1])]
            for t, r, p, m in zip(boundary.thetas, boundary.support, boundary.touch,
                                  boundary.n_touch)]
    return {
        "k": boundary.k,
        "n": boundary.n,
        "kind": boundary.kind,
        "center": S.cpair(boundary.center),
        "samples": {"columns": ["theta", "support", "x_minus", "y_minus", "x_plus", "y_plus"],
                    "rows": rows},
        "segments": [{"p1": S.cpair(s.p1), "p2": S.cpair(s.p2), "theta": s.theta}
                     for s in boundary.segments],
        "corners": [{"point": S.cpair(c.point), "theta_lo": c.theta_lo, "theta_hi": c.theta_hi,
                     "isolated": iso}
                    for c, iso in zip(boundary.corners, report.corner_isolated)],
        "arcs": [list(a) for a in boundary.arcs],
        "critical_angles": boundary.critical.tolist(),
        "is_polygon": report.is_polygon,
        "normal_flag": report.normal_flag,
        "agreement": report.agreement,
    }


def _cmd_range(args):
    op = decompose(S.read_matrix(args.input))
    _check_k(args.k, 1, op.n)
    b = trace_boundary(op, args.k, grid=args.grid, tol=args.tol)
    return {args.out: S.dumps(boundary_doc(b, classify(b, op)))}


def _cmd_scale(args):
    op = decompose(S.read_matrix(args.input))
    body = build_scale(op, directions=args.directions, hull_tol=args.hull_tol)
    faces = flat_faces(body)
    doc = {
        "kind": body.kind,
        "n": body.n,
        "vertex_count": len(body.vertices),
        "facet_count": len(body.facets),
        "vertices": body.vertices,
        "facets": body.facets,
        "provenance": body.provenance,
        "psi_one": body.psi_one,
        "flat_faces": [{"vertices": f.vertices, "normal": f.normal, "area": f.area,
                        "transverse": f.transverse} for f in faces],
    }
    if body.kind == "body":
        doc["euler_characteristic"] = euler_characteristic(body)
    out = {args.out: S.dumps(doc)}
    if args.mesh:
        fmt = args.mesh_format or os.path.splitext(args.mesh)[1].lstrip(".").lower()
        if fmt not in ("obj", "ply"):
            raise ArgumentError("mesh format must be obj or ply")
        out = {args.mesh: mesh_bytes(body, fmt), **out}
    return out


def _cmd_slice(args):
    op = decompose(S.read_matrix(args.input))
    _check_k(args.k, 0, op.n)
    sl = isotrace_slice(op, args.k, grid=args.grid)
    return {args.out: S.dumps({"k": args.k, "n": op.n, "t": sl.t, "polygon": sl.polygon})}


def _cmd_analyze(args):
    c = S.read_matrix(args.input)
    op = decompose(c)
    rs = reducing_subspaces(op, seed=args.seed)
    zero = np.zeros((op.n, op.n))
    slopes = [complex_slope(op, zero, p) for p in rs.projections]
    polygons = {}
    if op.n > 1:
        crit = _critical_or_empty(op)
        for k in range(1, op.n):
            b = trace_boundary(op, k, grid=args.grid, critical=crit)
            polygons[str(k)] = classify(b, op).is_polygon
    normal = is_normal(c)
    doc = {
        "n": op.n,
        "block_dims": rs.block_dims,
        "projections": [S.cmatrix(p) for p in rs.projections],
        "reducing_eigenvalues": [{"value": S.cpair(v), "multiplicity": m}
                                 for v, m in rs.reducing_eigenvalues],
        "complex_slopes": [S.cpair(s) for s in slopes],
        "commutant_dim": rs.commutant_dim,
        "commutator_norm": commutator_norm(c),
        "normal_flag": normal,
        "polygon_by_k": polygons,
        "agreement": all(v == normal for v in polygons.values()),
    }
    return {args.out: S.dumps(doc)}


def _critical_or_empty(op):
    shifted = op.shifted(op.tau)
    if not (np.any(shifted.b1) or np.any(shifted.b2)):
        return np.zeros(0)
    return critical_angles(shifted, cross_check=False).angles


def _cmd_pencil(args):
    op = decompose(S.read_matrix(args.input))
    crit = critical_angles(op, grid=args.grid)
    f = char_poly_bivariate(op)
    doc = {"n": op.n, "coeffs": [S.clist(row) for row in f.coeffs],
           "critical_angles": crit.angles, "confirmed": crit.confirmed,
           "generic_distinct_count": crit.generic_count,
           "multiplicity_profile": crit.multiplicity_profile}
    if f.y_degree >= 1 and op.n >= 1:
        disc = discriminant_y(f)
        doc["discriminant"] = {"coeffs": S.clist(disc.coeffs), "vanishes": disc.vanishes}
    return {args.out: S.dumps(doc)}


def _cmd_conjecture(args):
    if args.trials < 1:
        raise ArgumentError("trials must be positive")
    rep = conjecture_6_2_scan(args.n, args.trials, grid=args.grid, seed=args.seed,
                              control=args.control)
    return {args.out: S.dumps(rep)}


def _check_k(k, lo, hi):
    if not lo <= k <= hi:
        raise ArgumentError(f"--k must lie in {lo}..{hi}, got {k}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="knumrange", description="k-numerical ranges and spectral scales")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("range", help="trace the boundary of W_k(c)")
    r.add_argument("--input", required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--grid", type=int, default=3600)
    r.add_argument("--tol", type=float, default=1e-9)
    r.add_argument("--out", required=True)
    r.set_defaults(func=_cmd_range)

    s = sub.add_parser("scale", help="build the spectral scale body")
    s.add_argument("--input", required=True)
    s.add_argument("--directions", type=int, default=2000)
    s.add_argument("--hull-tol", type=float, default=1e-9)
    s.add_argument("--mesh")
    s.add_argument("--mesh-format", choices=("obj", "ply"))
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_scale)

    sl = sub.add_parser("slice", help="isotrace slice at x0 = k/n")
    sl.add_argument("--input", required=True)
    sl.add_argument("--k", type=int, required=True)
    sl.add_argument("--grid", type=int, default=3600)
    sl.add_argument("--out", required=True)
    sl.set_defaults(func=_cmd_slice)

    a = sub.add_parser("analyze", help="reducing structure and polygon flags")
    a.add_argument("--input", required=True)
    a.add_argument("--grid", type=int, default=3600)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", required=True)
    a.set_defaults(func=_cmd_analyze)

    pe = sub.add_parser("pencil", help="bivariate polynomial, discriminant, critical angles")
    pe.add_argument("--input", required=True)
    pe.add_argument("--grid", type=int, default=3600)
    pe.add_argument("--out", required=True)
    pe.set_defaults(func=_cmd_pencil)

    cj = sub.add_parser("conjecture", help="random search for non-normal polygonal middle ranges")
    cj.add_argument("--n", type=int, required=True)
    cj.add_argument("--trials", type=int, required=True)
    cj.add_argument("--seed", type=int, default=0)
    cj.add_argument("--grid", type=int, default=3600)
    cj.add_argument("--control", type=int, default=0)
    cj.add_argument("--out", required=True)
    cj.set_defaults(func=_cmd_conjecture)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _FlagError as exc:
        print(f"knumrange: error: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    try:
        S.atomic_write_many(args.func(args))
    except (InputError, DimensionError) as exc:
        print(f"knumrange: malformed input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArgumentError as exc:
        print(f"knumrange: invalid arguments: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    except DegeneratePencilError as exc:
        print(f"knumrange: degenerate pencil: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"knumrange: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
