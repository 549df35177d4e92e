"""Command-line interface.

Subcommands: ``dist`` (fixed-source solve), ``allpairs``, ``oracle``
(circle/disk/ring1d analytical-vs-numerical error), ``audit``
(metric-quality report for a distance matrix), ``field`` (line-field
interpolation/localization). Exit codes: 0 success, 1 validation error,
2 solver did not converge (results still written).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as rio
from .all_pairs import AllPairsSettings, solve_all_pairs
from .errors import MeshError, SolverError
from .fixed_source import AdmmSettings, solve_fixed_source
from .isolines import export_svg, extract_isolines
from .mesh import load_mesh
from .meshgen import disk_mesh
from .metrics import (
    fixed_pair_errors,
    gradient_norm_field,
    max_error_vs,
    triangle_audit,
)
from .operators import build_ops
from .regularizers import (
    LineField,
    bilaplacian_matrix,
    dirichlet_matrix,
    external_matrix,
    interpolate_line_field,
    localize_field,
    read_constraints,
    vfa_matrix,
)
from .oracles import (
    circle_dirichlet_exact,
    circle_hessian_exact,
    disk_exact,
    solve_ring_1d,
    RING_SETTINGS,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2


def _parse_sources(spec: str, mesh):
    if spec == "boundary":
        b = mesh.boundary_vertices()
        if b.size == 0:
            raise ValueError("mesh has no boundary edges; --source boundary is empty")
        return b
    try:
        return np.array([int(tok) for tok in spec.split(",") if tok], dtype=np.int64)
    except ValueError:
        raise ValueError(f"malformed source list {spec!r}") from None


def _build_regularizer(args, mesh, ops):
    reg = args.reg
    if reg == "dirichlet":
        return dirichlet_matrix(ops)
    if reg == "bilaplacian":
        return bilaplacian_matrix(ops)
    if reg == "vfa":
        if not args.field:
            raise ValueError("--reg vfa requires --field with a per-face field CSV")
        vectors = rio.load_face_field_csv(args.field)
        if vectors.shape[0] != mesh.num_faces:
            raise ValueError("field file row count does not match mesh faces")
        return vfa_matrix(ops, LineField(vectors), args.beta)
    if reg.startswith("external:"):
        return external_matrix(reg.split(":", 1)[1], mesh.num_vertices)
    raise ValueError(
        f"unknown regularizer {reg!r} (want dirichlet|vfa|bilaplacian|external:PATH)"
    )


def _cmd_dist(args) -> int:
    mesh = load_mesh(args.mesh)
    ops = build_ops(mesh)
    sources = _parse_sources(args.source, mesh)
    W = None if args.alpha_hat == 0.0 else _build_regularizer(args, mesh, ops)
    settings = AdmmSettings(
        alpha_hat=args.alpha_hat,
        eps_abs=args.eps_abs,
        eps_rel=args.eps_rel,
        max_iter=args.max_iter,
    )
    result = solve_fixed_source(mesh, ops, W, sources, settings)
    rio.save_values_csv(args.out, result.u)
    print(f"wrote {args.out} (n={len(result.u)}, iterations={result.iterations})")
    if args.grad_out:
        rio.save_values_csv(args.grad_out, gradient_norm_field(ops, result.u))
        print(f"wrote {args.grad_out}")
    if args.svg:
        isolines = extract_isolines(mesh, result.u, args.levels)
        export_svg(isolines, args.svg, axis=args.svg_axis)
        print(f"wrote {args.svg} ({len(isolines)} polylines)")
    if not result.converged:
        print("warning: solver did not converge within max_iter", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_allpairs(args) -> int:
    mesh = load_mesh(args.mesh)
    ops = build_ops(mesh)
    settings = AllPairsSettings(alpha_hat=args.alpha_hat, cap=args.cap, max_iter=args.max_iter)
    result = solve_all_pairs(mesh, ops, settings)
    if args.out.lower().endswith(".csv"):
        rio.save_matrix_csv(args.out, result.matrix)
    else:
        rio.save_matrix_rgdmat(args.out, result.matrix)
    print(f"wrote {args.out} (n={result.matrix.shape[0]}, iterations={result.iterations})")
    if not result.converged:
        print("warning: solver did not converge within max_iter", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_oracle(args) -> int:
    ring_settings = AdmmSettings(
        eps_abs=args.eps_abs, eps_rel=args.eps_rel, max_iter=args.max_iter
    )
    if args.case in ("circle", "ring1d"):
        n = args.n or 1000
        kind = "dirichlet" if args.case == "circle" else "bilaplacian"
        exact = circle_dirichlet_exact if args.case == "circle" else circle_hessian_exact
        res = solve_ring_1d(n, args.alpha, kind, settings=ring_settings)
        x = 2.0 * np.pi * np.arange(n) / n
        err = float(np.abs(res.u - exact(x, args.alpha)).max())
        converged = res.converged
        detail = f"N={n} iterations={res.iterations}"
    elif args.case == "disk":
        faces = args.n or 10000
        rings = max(2, round(np.sqrt(faces / 6.0)))
        mesh = disk_mesh(rings)
        ops = build_ops(mesh)
        W = dirichlet_matrix(ops)
        settings = AdmmSettings(
            alpha_raw=args.alpha, eps_abs=args.eps_abs, eps_rel=args.eps_rel, max_iter=args.max_iter
        )
        res = solve_fixed_source(mesh, ops, W, mesh.boundary_vertices(), settings)
        r = np.linalg.norm(mesh.vertices[:, :2], axis=1)
        err = float(np.abs(res.u - disk_exact(np.minimum(r, 1.0), args.alpha)).max())
        converged = res.converged
        detail = f"rings={rings} faces={mesh.num_faces} iterations={res.iterations}"
    else:
        raise ValueError(f"unknown oracle case {args.case!r}")
    print(f"max_err {err:.6g}")
    if args.report:
        print(f"case={args.case} alpha={args.alpha} {detail} converged={converged}")
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def _cmd_audit(args) -> int:
    D = rio.load_matrix(args.matrix)
    report = triangle_audit(D, args.area, sample_size=args.triplets, seed=args.seed)
    print(f"symmetry_max {report.symmetry_max:.6g}")
    print(f"symmetry_mean {report.symmetry_mean:.6g}")
    print(f"tri_violation_pct {report.tri_violation_pct:.6g}")
    print(f"tri_max_violation {report.tri_max_violation:.6g}")
    print(f"mode {report.mode} triplets {report.triplets}")
    if args.ref is not None:
        ref = rio.load_matrix(args.ref)
        print(f"max_error_pct {max_error_vs(D.ravel(), ref.ravel()):.6g}")
    if args.pair is not None:
        i, j = args.pair
        errs = fixed_pair_errors(D, i, j)
        print(f"pair {i} {j} max_violation {errs.max():.6g} violating_k {(errs > 0).sum()}")
    return EXIT_OK


def _cmd_field(args) -> int:
    mesh = load_mesh(args.mesh)
    ops = build_ops(mesh)
    constraints = read_constraints(args.constraints)
    field = interpolate_line_field(mesh, ops, constraints)
    if args.sigma is not None:
        centers = np.unique(mesh.faces[[int(f) for f, _ in constraints]].ravel())
        field = localize_field(mesh, ops, field, centers, args.sigma)
    rio.save_face_field_csv(args.out, field.vectors)
    print(f"wrote {args.out} ({mesh.num_faces} faces)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rgd", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dist", help="fixed-source regularized distance")
    d.add_argument("mesh")
    d.add_argument("--source", required=True, help="comma-separated vertex ids or 'boundary'")
    d.add_argument("--reg", default="dirichlet",
                   help="dirichlet|vfa|bilaplacian|external:PATH")
    d.add_argument("--alpha-hat", type=float, default=0.0)
    d.add_argument("--beta", type=float, default=0.0, help="vfa alignment weight")
    d.add_argument("--field", help="per-face field CSV for --reg vfa")
    d.add_argument("--out", default="u.csv")
    d.add_argument("--grad-out", dest="grad_out")
    d.add_argument("--svg", help="write isoline SVG here")
    d.add_argument("--levels", type=int, default=12)
    d.add_argument("--svg-axis", default="z", choices=["x", "y", "z"])
    d.add_argument("--eps-abs", type=float, default=5e-6)
    d.add_argument("--eps-rel", type=float, default=1e-2)
    d.add_argument("--max-iter", type=int, default=10000)
    d.set_defaults(func=_cmd_dist)

    a = sub.add_parser("allpairs", help="symmetric all-pairs distance matrix")
    a.add_argument("mesh")
    a.add_argument("--alpha-hat", type=float, default=0.0)
    a.add_argument("--out", default="D.rgdmat")
    a.add_argument("--cap", type=int, default=5000)
    a.add_argument("--max-iter", type=int, default=20000)
    a.set_defaults(func=_cmd_allpairs)

    o = sub.add_parser("oracle", help="analytical-vs-numerical error")
    o.add_argument("case", choices=["circle", "disk", "ring1d"])
    o.add_argument("--alpha", type=float, required=True)
    o.add_argument("--n", type=int, help="samples (circle/ring1d) or ~faces (disk)")
    o.add_argument("--report", action="store_true")
    o.add_argument("--eps-abs", type=float, default=RING_SETTINGS.eps_abs)
    o.add_argument("--eps-rel", type=float, default=RING_SETTINGS.eps_rel)
    o.add_argument("--max-iter", type=int, default=RING_SETTINGS.max_iter)
    o.set_defaults(func=_cmd_oracle)

    u = sub.add_parser("audit", help="metric-quality audit of a matrix file")
    u.add_argument("matrix", help=".rgdmat or .csv")
    u.add_argument("--area", type=float, required=True, help="total mesh area")
    u.add_argument("--triplets", type=int, default=100000)
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--pair", type=int, nargs=2, metavar=("I", "J"))
    u.add_argument("--ref", help="reference matrix for max_error_pct")
    u.set_defaults(func=_cmd_audit)

    f = sub.add_parser("field", help="interpolate sparse line-field constraints")
    f.add_argument("mesh")
    f.add_argument("--constraints", required=True, help="text lines: face_index dx dy dz")
    f.add_argument("--sigma", type=float, help="localize with a geodesic Gaussian")
    f.add_argument("--out", default="field.csv")
    f.set_defaults(func=_cmd_field)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (MeshError, SolverError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
