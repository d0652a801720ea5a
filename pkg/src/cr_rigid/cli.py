"""Command-line interface: ``cr-rigid {check,extract,es,elliptic}``.

Exit codes: 0 spherical (or success), 1 non-spherical (or flagged),
2 indeterminate, 3 other errors, 64 malformed input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from .elliptic import FirstOrderSystemSolver, fields_to_csv, manufactured_study
from .es_family import ESParams, derive, es_surface
from .exceptions import CRRigidError, GridError, SpecError
from .jets import MAX_ORDER
from .sphericity import (
    NONSPHERICAL_TOL,
    SPHERICAL_TOL,
    CoeffQuadruple,
    extract_coeffs_pointwise,
    fit_holomorphic_models,
    sphericity_report,
)
from .surfaces import Disc, load_surface_spec, parse_es, surface_from_spec
from .utils import cartesian_grid, check_resolution

log = logging.getLogger("cr_rigid")

EXIT_OK, EXIT_NONSPHERICAL, EXIT_INDETERMINATE, EXIT_ERROR, EXIT_USAGE = 0, 1, 2, 3, 64
VERDICT_CODES = {"spherical": EXIT_OK, "non-spherical": EXIT_NONSPHERICAL, "indeterminate": EXIT_INDETERMINATE}
MIN_ORDER = 4
MIN_RESIDUAL_ORDER = 6


class _Parser(argparse.ArgumentParser):
    # argparse's default exit status 2 collides with "indeterminate"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _clean(obj):
    """Replace non-finite floats by ``None`` so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _validate(args) -> None:
    if not args.spherical_tol < args.nonspherical_tol:
        raise SpecError("--spherical-tol must be below --nonspherical-tol")
    if not MIN_ORDER <= args.order <= MAX_ORDER:
        raise SpecError(f"--order must be in {MIN_ORDER}..{MAX_ORDER}")
    if args.command in ("check", "es") and args.order < MIN_RESIDUAL_ORDER:
        raise SpecError(f"--order must be at least {MIN_RESIDUAL_ORDER} for residuals")
    if args.grid is not None:
        check_resolution(args.grid, name="--grid")
    if args.radius is not None and not args.radius > 0:
        raise SpecError("--radius must be positive")


def _surface(args):
    if not args.spec:
        raise SpecError("--spec is required")
    s = surface_from_spec(load_surface_spec(args.spec), args.root_index)
    if args.radius is not None:
        try:
            s = s.with_domain(Disc(s.domain.center, args.radius))
        except ValueError as exc:
            raise SpecError(str(exc)) from exc
    return s


def _sample_points(args, domain: Disc) -> np.ndarray:
    n = args.grid or 9
    if not args.random_grid:
        return cartesian_grid(domain, n)
    rng = np.random.default_rng(args.seed)
    rad = domain.radius * np.sqrt(rng.uniform(0, 1, n * n)) * 0.999
    ang = rng.uniform(0, 2 * np.pi, n * n)
    return (domain.center + rad * np.exp(1j * ang)).reshape(n, n)


def cmd_check(args) -> int:
    s = _surface(args)
    rep = sphericity_report(s, spherical_tol=args.spherical_tol, nonspherical_tol=args.nonspherical_tol,
                            order=args.order, grid=_sample_points(args, s.domain))
    log.info("verdict %s (%s)", rep.verdict, rep.summary)
    _emit(args, rep.to_csv() if args.format == "csv" else dumps(rep.to_dict()))
    return VERDICT_CODES[rep.verdict]


def cmd_extract(args) -> int:
    s = _surface(args)
    grid = _sample_points(args, s.domain)
    rows = []
    for z in grid.ravel():
        z = complex(z)
        try:
            vals = extract_coeffs_pointwise(s, z).values()
            rows.append({"z": [z.real, z.imag], "error": None,
                         **{k: [v.real, v.imag] for k, v in zip("ABCD", vals)}})
        except CRRigidError as exc:
            rows.append({"z": [z.real, z.imag], "error": str(exc), **{k: None for k in "ABCD"}})
    fit = fit_holomorphic_models(s, grid=grid, degree=args.degree)
    if args.format == "csv":
        header = ["re_z", "im_z"] + [f"{k}_{p}" for k in "ABCD" for p in ("re", "im")]
        table = [r["z"] + [x for k in "ABCD" for x in (r[k] or ["", ""])] for r in rows]
        _emit(args, _csv(header, table))
    else:
        _emit(args, dumps({"surface": s.kind, "points": rows, "fit": fit.to_dict()}))
    if not fit.holomorphic:
        log.warning("quadruple is not holomorphic to %g (cr residual %s)", fit.tolerance, fit.cr_residual)
    return EXIT_OK if fit.holomorphic else EXIT_NONSPHERICAL


def _es_params(args) -> tuple[ESParams, int | None]:
    if args.spec:
        spec = load_surface_spec(args.spec)
        if spec.get("kind") != "es":
            raise SpecError("es subcommand needs a spec of kind 'es'")
        p, idx = parse_es(spec.get("es"))
        return p, args.root_index if args.root_index is not None else idx
    return ESParams(complex(args.c_re, args.c_im), args.tau, args.rho), args.root_index


def _degeneration_note(d) -> str | None:
    if d.phi == 0 and d.theta == 0 and abs(d.r_squared) == 0:
        return "heisenberg: the germ is u = |z|^2"
    if d.phi == 0 and d.theta == 0 and d.r_squared > 0:
        return "sin quadric: sin(2 r u) / (2 r) = |z|^2 with r^2 = -rho"
    return None


def cmd_es(args) -> int:
    p, idx = _es_params(args)
    first = derive(p, 0)
    indices = range(len(first.all_real_roots)) if idx is None else [int(idx)]
    records, codes = [], []
    for i in indices:
        try:
            d = derive(p, i)
        except IndexError as exc:
            raise SpecError(str(exc)) from exc
        rec = d.record()
        note = _degeneration_note(d)
        if note:
            rec["note"] = note
        if not args.no_verify:
            try:
                s = es_surface(p, i, radius=args.radius or 0.3, grid=args.grid or 9)
                rep = sphericity_report(s, spherical_tol=args.spherical_tol,
                                        nonspherical_tol=args.nonspherical_tol, order=args.order)
                rec["verification"] = {"verdict": rep.verdict, "radius": s.domain.radius, **rep.summary}
                codes.append(VERDICT_CODES[rep.verdict])
            except CRRigidError as exc:
                rec["verification"] = {"verdict": "error", "error": str(exc)}
                codes.append(EXIT_ERROR)
        records.append(rec)
    if args.format == "csv":
        rows = [[r["chosen"], repr(r["phi"]), repr(r["theta"]), repr(r["r_squared"]), r["regime"],
                 r.get("verification", {}).get("verdict", "")] for r in records]
        _emit(args, _csv(["root_index", "phi", "theta", "r_squared", "regime", "verdict"], rows))
    else:
        _emit(args, dumps({"records": records}))
    return max(codes, default=EXIT_OK)


def _known_quadruple(s, degree: int) -> CoeffQuadruple:
    if s.kind == "heisenberg":
        return CoeffQuadruple.zero()
    if s.kind == "sin_quadric":
        return CoeffQuadruple.polynomial(A=(0, 1))
    fit = fit_holomorphic_models(s, degree=degree)
    if not fit.holomorphic:
        raise CRRigidError("surface has no holomorphic quadruple; elliptic study not applicable")
    return fit.quadruple


def cmd_elliptic(args) -> int:
    if not args.spec:
        raise SpecError("--spec is required")
    n = args.grid or 17
    check_resolution(n, name="--grid")
    half = args.radius or 0.25
    # the source must cover the rectangle corners
    s = surface_from_spec(load_surface_spec(args.spec), args.root_index)
    try:
        s = s.with_domain(Disc(0j, 1.02 * half * math.sqrt(2.0)))
    except ValueError as exc:
        raise SpecError(f"rectangle half-width {half} outside the surface's domain: {exc}") from exc
    q = _known_quadruple(s, args.degree)
    resolutions = (n, 2 * n - 1, 4 * n - 3)
    solver = FirstOrderSystemSolver()
    study = manufactured_study(q, s, half_width=half, resolutions=resolutions, solver=solver)
    if args.log:
        with open(args.log, "w") as fh:
            fh.write(solver.log_jsonl())
    if args.fields:
        with open(args.fields, "w", newline="") as fh:
            fh.write(fields_to_csv(solver.r_, solver.s_))
    if args.format == "csv":
        orders = ["exact"] * len(resolutions) if study.exact else [""] + [repr(o) for o in study.orders]
        rows = [[r, repr(e), o, st] for r, e, o, st in zip(study.resolutions, study.errors, orders, study.status)]
        _emit(args, _csv(["resolution", "max_error", "observed_order", "status"], rows))
    else:
        _emit(args, dumps({"surface": s.kind, "half_width": half, "quadruple": q.to_dict(),
                           **study.to_dict()}))
    return EXIT_OK if study.passed else EXIT_NONSPHERICAL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="surface specification JSON")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--radius", type=float, help="domain radius (elliptic: rectangle half-width)")
    common.add_argument("--grid", type=int, help="points per axis (elliptic: coarsest resolution)")
    common.add_argument("--order", type=int, default=6, help="jet order, 4..10")
    common.add_argument("--root-index", type=int, help="index into the sorted real roots")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--random-grid", action="store_true", help="seeded random points in the disc")
    common.add_argument("--spherical-tol", type=float, default=SPHERICAL_TOL)
    common.add_argument("--nonspherical-tol", type=float, default=NONSPHERICAL_TOL)
    common.add_argument("--no-verify", action="store_true", help="es: skip the sphericity report")
    common.add_argument("--degree", type=int, default=1, help="degree of holomorphic model fits")

    parser = _Parser(prog="cr-rigid", description="Sphericity checks for rigid hypersurfaces u = F(z, zbar).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("check", parents=[common], help="R1/R2 residual report and verdict")
    sub.add_parser("extract", parents=[common], help="pointwise A, B, C, D and holomorphic fit")
    es = sub.add_parser("es", parents=[common], help="ES family derivation and verification")
    es.add_argument("--c-re", type=float, default=0.0)
    es.add_argument("--c-im", type=float, default=0.0)
    es.add_argument("--tau", type=float, default=0.0)
    es.add_argument("--rho", type=float, default=0.0)
    el = sub.add_parser("elliptic", parents=[common], help="manufactured-solution study of the first-order system")
    el.add_argument("--log", help="write the finest solve's convergence log (JSON lines)")
    el.add_argument("--fields", help="write the finest solution as CSV (x, y, r, s)")
    return parser


COMMANDS = {"check": cmd_check, "extract": cmd_extract, "es": cmd_es, "elliptic": cmd_elliptic}


def main(argv=None) -> int:
    level = os.environ.get("CR_RIGID_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # --help and usage errors; keep main() returning instead of exiting
        return int(exc.code or 0)
    try:
        _validate(args)
        return COMMANDS[args.command](args)
    except (SpecError, GridError) as exc:
        print(f"cr-rigid: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CRRigidError as exc:
        print(f"cr-rigid: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
