"""Command-line interface.

Subcommands
-----------
density / exceedance
    Sample the peak-height density h(x) or exceedance F(x) on an x grid and
    emit CSV (default) or JSON.  `--preset fig1` sweeps the Euclidean
    parameter sets (N in 1..3, kappa in {1, 0.5, 0.1}); `--preset fig2` the
    sphere sets (kappa1, kappa2) in {(1,2), (1,1), (0.1,0.1)}.  `--plot FILE`
    also renders the curves to an image next to the data.
expected-maxima
    Expected local-maxima count per unit volume (R^N) or unit-area geodesic
    ball (S^N), as JSON.
pvalue
    Exceedance F(u), expected count, and thresholded count at a level u.
goe-check
    Compare the closed-form largest-eigenvalue exponential moment against the
    brute-force quadrature oracle.
simulate
    Monte Carlo peak counts for a covariance spec file, with a comparison
    against the closed forms.

Data goes to stdout (or --output/--out-dir), diagnostics to stderr.  Exit
codes: 0 success, 2 usage error, 3 domain error, 4 quadrature convergence
failure.  Runs are deterministic for fixed flags and seed.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, curves, euclid, goe, montecarlo, sphere
from .errors import ConvergenceError, DomainError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_CONVERGENCE = 4


def _merge_dash_values(argv):
    """Join flag values that start with '-' (ranges like -4:4:0.01, -1e9)
    into --flag=value form so argparse does not mistake them for options."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (
            tok.startswith("--")
            and "=" not in tok
            and i + 1 < len(argv)
            and len(argv[i + 1]) > 1
            and argv[i + 1][0] == "-"
            and (argv[i + 1][1].isdigit() or argv[i + 1][1] == ".")
        ):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _parse_range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isopeak",
        description="Height distributions and expected counts of local maxima of "
        "isotropic Gaussian random fields.",
    )
    parser.add_argument("--version", action="version", version=f"isopeak {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for kind in ("density", "exceedance"):
        p = sub.add_parser(kind, help=f"sample the peak-height {kind} on an x grid")
        p.add_argument("--geometry", choices=("euclidean", "sphere"))
        p.add_argument("--dim", type=int, choices=(1, 2, 3))
        p.add_argument("--kappa", type=float, help="Euclidean shape parameter")
        p.add_argument("--rho1", type=float, help="covariance derivative rho'(0) (< 0)")
        p.add_argument("--rho2", type=float, help="covariance second derivative rho''(0) (> 0)")
        p.add_argument("--kappa1", type=float, help="sphere shape parameter C'/C''")
        p.add_argument("--kappa2", type=float, help="sphere shape parameter C'^2/C''")
        p.add_argument("--c1", type=float, help="sphere covariance derivative C'(1) (> 0)")
        p.add_argument("--c2", type=float, help="sphere covariance second derivative C''(1) (> 0)")
        p.add_argument("--x", type=_parse_range, default=(-4.0, 4.0, 0.01),
                       metavar="START:STOP:STEP", help="sampling grid (default -4:4:0.01)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", type=Path, help="write data here instead of stdout")
        p.add_argument("--preset", choices=("fig1", "fig2"),
                       help="standard parameter sweep; writes one CSV per curve")
        p.add_argument("--out-dir", type=Path, help="directory for preset CSV files")
        p.add_argument("--plot", type=Path, help="also render the curve(s) to this image file")
        p.set_defaults(func=_cmd_curve, kind=kind)

    p = sub.add_parser("expected-maxima", help="expected count of local maxima")
    _add_model_flags(p)
    p.set_defaults(func=_cmd_expected_maxima)

    p = sub.add_parser("pvalue", help="peak-height exceedance and expected counts at a level")
    _add_model_flags(p)
    p.add_argument("--u", type=float, required=True, help="height threshold")
    p.set_defaults(func=_cmd_pvalue)

    p = sub.add_parser("goe-check", help="closed form vs quadrature oracle for the GOE moment")
    p.add_argument("--n", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=_cmd_goe_check)

    p = sub.add_parser("simulate", help="Monte Carlo peak statistics vs closed forms")
    p.add_argument("--spec", type=Path, help="covariance spec file (default: rho = exp(-r^2/2))")
    p.add_argument("--dim", type=int, default=1, choices=(1, 2, 3))
    p.add_argument("--replicates", type=int, default=200)
    p.add_argument("--grid-points", type=int, default=None,
                   help="points per side (defaults: 1024 / 256 / 64 for dim 1 / 2 / 3)")
    p.add_argument("--side-length", type=float, default=None,
                   help="torus side length (defaults: 100 / 40 / 12.8)")
    p.add_argument("--seed", type=int, default=20240801)
    p.add_argument("--output", type=Path)
    p.set_defaults(func=_cmd_simulate)

    return parser


def _add_model_flags(p):
    p.add_argument("--geometry", choices=("euclidean", "sphere"), required=True)
    p.add_argument("--dim", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--kappa", type=float)
    p.add_argument("--rho1", type=float)
    p.add_argument("--rho2", type=float)
    p.add_argument("--kappa1", type=float)
    p.add_argument("--kappa2", type=float)
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)


def _build_euclid_model(args, parser) -> euclid.EuclideanModel:
    if args.rho1 is not None or args.rho2 is not None:
        if args.rho1 is None or args.rho2 is None:
            parser.error("--rho1 and --rho2 must be given together")
        return euclid.EuclideanModel(args.dim, args.rho1, args.rho2)
    if args.kappa is None:
        parser.error("euclidean geometry needs --kappa or --rho1/--rho2")
    return euclid.EuclideanModel.from_kappa(args.dim, args.kappa)


def _build_sphere_model(args, parser, need_kappa2=True) -> sphere.SphereModel:
    if args.c1 is not None or args.c2 is not None:
        if args.c1 is None or args.c2 is None:
            parser.error("--c1 and --c2 must be given together")
        return sphere.SphereModel(args.dim, args.c1, args.c2)
    if args.kappa1 is None:
        parser.error("sphere geometry needs --kappa1/--kappa2 or --c1/--c2")
    if args.kappa2 is None:
        if need_kappa2:
            parser.error("this query needs --kappa2 as well (or --c1/--c2)")
        # Count queries depend on kappa1 only; any admissible kappa2 works.
        return sphere.SphereModel.from_kappas(args.dim, args.kappa1, args.kappa1)
    return sphere.SphereModel.from_kappas(args.dim, args.kappa1, args.kappa2)


def _warn_conjectured(validity: str, geometry: str, dim: int):
    if validity == "conjectured":
        if geometry == "euclidean":
            bound = euclid.KAPPA_SQ_BOUND[dim]
            detail = f"1 < kappa^2 < {bound:g}"
        else:
            bound = sphere.DELTA_BOUND[dim]
            detail = f"1 < kappa2 - kappa1 < {bound:g}"
        print(
            f"warning: parameters fall in the conjectured regime ({detail} for dim {dim}); "
            "the closed forms are unproven there",
            file=sys.stderr,
        )


def _emit(text: str, output: Path | None):
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _cmd_curve(args, parser) -> int:
    xs = curves.grid_from_range(*args.x)
    if args.preset:
        if args.out_dir is None:
            parser.error("--preset requires --out-dir")
        tables = curves.preset_curves(args.preset, args.kind, xs)
        args.out_dir.mkdir(parents=True, exist_ok=True)
        for table in tables:
            if table.geometry == "euclidean":
                stem = f"{args.kind}_euclidean_n{table.dim}_kappa{table.params['kappa']:g}"
            else:
                stem = (f"{args.kind}_sphere_n{table.dim}"
                        f"_kappa1_{table.params['kappa1']:g}_kappa2_{table.params['kappa2']:g}")
            with open(args.out_dir / f"{stem}.csv", "w") as stream:
                table.to_csv(stream)
            _warn_conjectured(table.validity, table.geometry, table.dim)
        if args.plot:
            from . import plots

            plots.render_curves(tables, args.plot, title=f"peak-height {args.kind} ({args.preset})")
        print(f"wrote {len(tables)} curves to {args.out_dir}", file=sys.stderr)
        return EXIT_OK

    if args.geometry is None or args.dim is None:
        parser.error("--geometry and --dim are required without --preset")
    if args.geometry == "euclidean":
        model = _build_euclid_model(args, parser)
        table = curves.euclidean_curve(args.dim, model, xs, args.kind)
    else:
        model = _build_sphere_model(args, parser)
        table = curves.sphere_curve(args.dim, model, xs, args.kind)
    _warn_conjectured(table.validity, table.geometry, table.dim)

    stream = io.StringIO()
    if args.format == "csv":
        table.to_csv(stream)
    else:
        table.to_json(stream)
    _emit(stream.getvalue(), args.output)
    if args.plot:
        from . import plots

        plots.render_curves([table], args.plot, title=f"peak-height {args.kind}")
    return EXIT_OK


def _cmd_expected_maxima(args, parser) -> int:
    if args.geometry == "euclidean":
        model = _build_euclid_model(args, parser)
        value = euclid.expected_maxima(model)
        params = {"kappa": model.kappa, "rho1": model.rho1, "rho2": model.rho2}
        unit = "unit-volume cube"
    else:
        model = _build_sphere_model(args, parser, need_kappa2=False)
        value = sphere.expected_maxima(model)
        params = {"kappa1": model.kappa1, "kappa2": model.kappa2}
        unit = "unit-area geodesic ball"
    _warn_conjectured(model.validity, args.geometry, args.dim)
    report = {
        "geometry": args.geometry,
        "dim": args.dim,
        "params": params,
        "expected_maxima": value,
        "per": unit,
        "validity": model.validity,
    }
    _emit(_json_dumps(report), None)
    return EXIT_OK


def _cmd_pvalue(args, parser) -> int:
    if args.geometry == "euclidean":
        model = _build_euclid_model(args, parser)
        mod = euclid
        params = {"kappa": model.kappa, "rho1": model.rho1, "rho2": model.rho2}
    else:
        model = _build_sphere_model(args, parser)
        mod = sphere
        params = {"kappa1": model.kappa1, "kappa2": model.kappa2}
    _warn_conjectured(model.validity, args.geometry, args.dim)
    f_u = mod.height_exceedance(model, args.u)
    e_m = mod.expected_maxima(model)
    report = {
        "geometry": args.geometry,
        "dim": args.dim,
        "params": params,
        "u": args.u,
        "F": f_u,
        "expected_maxima": e_m,
        "expected_maxima_above": f_u * e_m,
        "validity": model.validity,
    }
    _emit(_json_dumps(report), None)
    return EXIT_OK


def _cmd_goe_check(args, parser) -> int:
    if args.a <= 0.0:
        parser.error("--a must be > 0")
    if not (1e-10 <= args.tol <= 1e-2):
        parser.error("--tol must lie in [1e-10, 1e-2]")
    query = goe.GoeQuery(args.n, args.a, args.b)
    closed = goe.goe_expectation_closed(query)
    quadrature = goe.goe_expectation_quadrature(query, args.tol)
    abs_err = abs(closed - quadrature)
    report = {
        "n": args.n,
        "a": args.a,
        "b": args.b,
        "tol": args.tol,
        "closed": closed,
        "quadrature": quadrature,
        "abs_error": abs_err,
        "rel_error": abs_err / max(abs(closed), 1e-300),
    }
    _emit(_json_dumps(report), None)
    return EXIT_OK


_SIM_DEFAULTS = {1: (1024, 100.0), 2: (256, 40.0), 3: (64, 12.8)}


def load_covariance_spec(path: Path):
    """Flat `key = value` covariance spec.

    Euclidean::

        geometry = euclidean
        weights  = 0.5 0.5
        scales   = 0.2 5.0

    Circle (spectrum a_0 .. a_K)::

        geometry = circle
        coeffs   = 0 0.8 0 0 0 0.2
    """
    entries = {}
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"spec line without '=': {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        entries[key.lower()] = value
    geometry = entries.get("geometry", "euclidean").lower()
    try:
        if geometry == "euclidean":
            weights = tuple(float(v) for v in entries["weights"].replace(",", " ").split())
            scales = tuple(float(v) for v in entries["scales"].replace(",", " ").split())
            return montecarlo.EuclideanCovariance(weights, scales)
        if geometry in ("circle", "s1"):
            coeffs = tuple(float(v) for v in entries["coeffs"].replace(",", " ").split())
            return montecarlo.CircleCovariance(coeffs)
    except KeyError as exc:
        raise DomainError(f"covariance spec is missing key {exc}") from None
    raise DomainError(f"unknown spec geometry {geometry!r} (expected euclidean or circle)")


def _cmd_simulate(args, parser) -> int:
    if args.replicates < 30:
        parser.error("--replicates must be at least 30")
    spec = (
        load_covariance_spec(args.spec)
        if args.spec is not None
        else montecarlo.EuclideanCovariance((1.0,), (0.5,))
    )

    if isinstance(spec, montecarlo.CircleCovariance):
        grid = args.grid_points or 1024
        result = montecarlo.estimate_circle_statistics(spec, args.replicates, grid, args.seed)
        model = spec.model()
        closed_rate = sphere.expected_maxima(model)
        f0 = sphere.height_exceedance(model, 0.0)
        geometry = "sphere"
        dim = 1
        params = {"kappa1": model.kappa1, "kappa2": model.kappa2}
    else:
        grid, side = _SIM_DEFAULTS[args.dim]
        if args.grid_points is not None:
            grid = args.grid_points
        if args.side_length is not None:
            side = args.side_length
        result = montecarlo.estimate_peak_statistics(
            spec, args.dim, args.replicates, grid, side, args.seed
        )
        model = spec.model(args.dim)
        closed_rate = euclid.expected_maxima(model)
        f0 = euclid.height_exceedance(model, 0.0)
        geometry = "euclidean"
        dim = args.dim
        params = {"kappa": model.kappa, "rho1": model.rho1, "rho2": model.rho2}

    rate = result.rate()
    se = result.rate_standard_error()
    p0, p0_se = result.exceedance_with_error(0.0)
    report = {
        "geometry": geometry,
        "dim": dim,
        "params": params,
        "result": result.to_json_dict(),
        "comparison": {
            "empirical_rate": rate,
            "rate_standard_error": se,
            "closed_form_rate": closed_rate,
            "z_score": (rate - closed_rate) / se,
            "empirical_exceedance_at_0": p0,
            "exceedance_standard_error": p0_se,
            "closed_form_exceedance_at_0": f0,
        },
    }
    _emit(_json_dumps(report), args.output)
    return EXIT_OK


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(_merge_dash_values(list(argv)))
    try:
        return args.func(args, parser)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


def entry():
    raise SystemExit(main())
