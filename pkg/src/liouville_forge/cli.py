"""Command-line front end.

Four subcommands (find-matrix, certify, skeleton, descent) that run the
library and emit deterministic JSON reports: sorted keys, floats printed
with 17 significant digits, and enough echoed inputs to re-run the command.
Exit codes: 0 success/pass, 1 verification failure, 2 usage error, 3 search
exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .contact_kernel import (
    ContactModel,
    ModelError,
    UnknownModel,
    anosov_model,
    builtin_model,
    certify_contraction,
)
from .spectrum_search import SearchExhausted, SpectrumRequest, find_matrix
from .torus_builder import (
    DescentViolation,
    GExtension,
    MappingTorusModel,
    NonConstantG,
    boundary_transversality_check,
    build_mapping_torus,
    count_clusters,
    cross_section,
    descent_check,
    export_cloud_csv,
    iterate_attractor,
    section_cloud,
    skeleton_analysis,
    suggested_section_gap,
)

SCHEMA_VERSION = 1
THREADS_ENV = "LIOUVILLE_FORGE_THREADS"


class _Float17(float):
    """Float that serializes with a fixed 17-significant-digit format."""

    def __repr__(self) -> str:  # json uses repr for float subclasses
        return format(float(self), ".17g")


def _jsonify(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Float17(float(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    return obj


def resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _write_report(args: argparse.Namespace, command: str, status: str, results: dict) -> None:
    inputs = {
        k: v for k, v in vars(args).items() if k not in ("func",) and v is not argparse.SUPPRESS
    }
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "inputs": inputs,
        "rng_seed": getattr(args, "seed", None),
        "threads": resolve_threads(getattr(args, "threads", None)),
        "status": status,
        "results": results,
    }
    text = json.dumps(_jsonify(report), sort_keys=True, indent=2) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_model(args: argparse.Namespace) -> tuple[ContactModel, dict]:
    name = args.model.replace("-", "_")
    if name == "anosov":
        request = SpectrumRequest(
            n=args.n,
            mu=tuple(args.mu or ()),
            eps=args.eps,
            k1_max=args.k1_max,
            seed=args.seed,
        )
        cert = find_matrix(request)
        return anosov_model(cert.matrix, cert), {
            "spectrum_certificate": cert.to_dict()
        }
    params = {}
    if name == "transverse_knot":
        params = {"c": args.c, "delta": args.delta, "eps": args.knot_eps}
    return builtin_model(name, params), {}


# -- subcommands ----------------------------------------------------------------

def cmd_find_matrix(args: argparse.Namespace) -> int:
    try:
        request = SpectrumRequest(
            n=args.n,
            mu=tuple(args.mu or ()),
            eps=args.eps,
            k1_max=args.k1_max,
            seed=args.seed,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        cert = find_matrix(request)
    except SearchExhausted as exc:
        _write_report(args, "find-matrix", "not-found", {"error": str(exc)})
        return 3
    _write_report(args, "find-matrix", "pass", {"certificate": cert.to_dict()})
    return 0


def cmd_certify(args: argparse.Namespace) -> int:
    try:
        model, extra = _build_model(args)
    except (ValueError, UnknownModel, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SearchExhausted as exc:
        _write_report(args, "certify", "not-found", {"error": str(exc)})
        return 3
    cert = certify_contraction(
        model, samples=args.samples, tol=args.tol, rng_seed=args.seed
    )
    results = {"contraction_certificate": cert.to_dict(), **extra}
    status = "pass" if cert.passed else "fail"
    _write_report(args, "certify", status, results)
    return 0 if cert.passed else 1


def cmd_skeleton(args: argparse.Namespace) -> int:
    try:
        model, extra = _build_model(args)
    except (ValueError, UnknownModel, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SearchExhausted as exc:
        _write_report(args, "skeleton", "not-found", {"error": str(exc)})
        return 3
    threads = resolve_threads(args.threads)
    theta0 = args.section if args.section is not None else 0.0
    try:
        analysis = skeleton_analysis(
            model,
            args.depth,
            args.seeds,
            scales=args.scales,
            rng_seed=args.seed,
            theta0=theta0,
            threads=threads,
        )
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    results = {"skeleton": analysis.to_dict(), **extra}

    csv_points = None
    csv_names = None
    if args.section is not None:
        mult = int(model.params.get("angle_multiplier", 1))
        branches = max(1, mult**args.depth)
        sample = section_cloud(
            model,
            args.depth,
            max(8, args.seeds // branches),
            theta0=args.section,
            rng_seed=args.seed,
            threads=threads,
        )
        pts2 = cross_section(sample, args.section, args.thickness)
        section_info: dict = {"theta0": args.section, "points": len(pts2)}
        if "rate_y" in model.params:
            sub = pts2[:: max(1, len(pts2) // 4096)]
            section_info["clusters"] = count_clusters(
                sub, suggested_section_gap(model, args.depth)
            )
        results["section"] = section_info
        csv_points = pts2
        csv_names = [model.chart.names[i] for i in sample.meta["interval_idx"]]
    elif args.csv_out:
        sample = iterate_attractor(
            model, args.depth, args.seeds, rng_seed=args.seed, threads=threads
        )
        csv_points = sample.points
        csv_names = list(model.chart.names)

    if args.csv_out and csv_points is not None:
        rows = export_cloud_csv(csv_points, csv_names, args.csv_out)
        results["csv"] = {"path": args.csv_out, "rows": rows}

    _write_report(args, "skeleton", "pass", results)
    return 0


def cmd_descent(args: argparse.Namespace) -> int:
    try:
        model, extra = _build_model(args)
    except (ValueError, UnknownModel, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SearchExhausted as exc:
        _write_report(args, "descent", "not-found", {"error": str(exc)})
        return 3
    try:
        if args.force_G is not None:
            g0 = float(args.force_G)

            def forced(pts):
                return np.full(np.atleast_2d(pts).shape[0], g0)

            torus = MappingTorusModel(
                base=model, G=GExtension(forced, "forced", g0), tilt_eps=args.tilt_eps
            )
        else:
            torus = build_mapping_torus(
                model, mode=args.g_mode, tilt_eps=args.tilt_eps, rng_seed=args.seed
            )
    except (NonConstantG, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    margin = boundary_transversality_check(torus, rng_seed=args.seed)
    try:
        residual = descent_check(torus, samples=args.samples, tol=args.tol, rng_seed=args.seed)
        ok = margin > 0.0
    except DescentViolation as exc:
        residual = exc.residual
        ok = False
    results = {
        "descent": {
            "max_residual": residual,
            "tol": args.tol,
            "transversality_margin": margin,
            "g_mode": torus.G.mode,
            "g_constant": torus.G.constant,
            "g_meta": dict(torus.G.meta),
        },
        **extra,
    }
    _write_report(args, "descent", "pass" if ok else "fail", results)
    return 0 if ok else 1


# -- parser -----------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="RNG seed (determinism contract)")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker cap (default: {THREADS_ENV} or CPU count)")
    p.add_argument("--out", type=str, default=None, help="JSON report path (default stdout)")


def _add_model_args(p: argparse.ArgumentParser, models: tuple[str, ...]) -> None:
    p.add_argument("--model", required=True, choices=models)
    p.add_argument("--c", type=float, default=0.1, help="transverse-knot slope parameter")
    p.add_argument("--delta", type=float, default=1e-3, help="transverse-knot push-off size")
    p.add_argument("--knot-eps", type=float, default=0.5, dest="knot_eps",
                   help="transverse-knot neighborhood radius")
    p.add_argument("--n", type=int, default=2, help="anosov: torus dimension")
    p.add_argument("--mu", type=float, nargs="*", default=[],
                   help="anosov: prescribed middle eigenvalues (n-2 values)")
    p.add_argument("--eps", type=float, default=0.4, help="anosov: spectrum tolerance")
    p.add_argument("--k1-max", type=int, default=200_000, dest="k1_max",
                   help="anosov: lattice scan budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liouville-forge",
        description=(
            "Verification and search toolkit: certify contraction maps on "
            "contact charts, check descent of the rescaled form on partial "
            "mapping tori, explore skeleton attractors, and search integer "
            "companion matrices with prescribed real spectrum."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("find-matrix", help="search for a unit-determinant matrix "
                       "with prescribed real spectrum")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mu", type=float, nargs="*", default=[])
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--k1-max", type=int, default=200_000, dest="k1_max")
    _add_common(p)
    p.set_defaults(func=cmd_find_matrix)

    p = sub.add_parser("certify", help="certify the contraction axioms for a model")
    _add_model_args(p, ("solenoid", "jet-space", "transverse-knot", "anosov"))
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-8)
    _add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("skeleton", help="attractor iteration, cross-sections, and "
                       "box-counting dimension")
    _add_model_args(p, ("solenoid", "jet-space", "anosov"))
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--seeds", type=int, default=100_000)
    p.add_argument("--scales", type=float, nargs="*", default=None)
    p.add_argument("--section", type=float, default=None,
                   help="fiber angle for a structured cross-section")
    p.add_argument("--thickness", type=float, default=1e-6,
                   help="cross-section slab half-width")
    p.add_argument("--csv-out", type=str, default=None, dest="csv_out")
    _add_common(p)
    p.set_defaults(func=cmd_skeleton)

    p = sub.add_parser("descent", help="check that the rescaled form survives the "
                       "mapping-torus gluing")
    _add_model_args(p, ("solenoid", "jet-space", "transverse-knot", "anosov"))
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--force-G", type=float, default=None, dest="force_G",
                   help="override the roof function with a constant")
    p.add_argument("--g-mode", choices=("auto", "constant", "blend", "model"),
                   default="auto", dest="g_mode")
    p.add_argument("--tilt-eps", type=float, default=0.1, dest="tilt_eps")
    _add_common(p)
    p.set_defaults(func=cmd_descent)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "find-matrix" and len(args.mu) != args.n - 2:
        parser.error(f"--mu must supply exactly {args.n - 2} values for --n {args.n}")
    if getattr(args, "model", "").replace("-", "_") == "anosov" and len(args.mu) != args.n - 2:
        parser.error(f"--mu must supply exactly {args.n - 2} values for --n {args.n}")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
