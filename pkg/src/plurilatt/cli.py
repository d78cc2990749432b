"""Command-line front end.

Every command prints JSON lines: one record per check, then a summary object
with the command echo, input digests, residual statistics, verdict counts and
wall time. Random data comes from ``numpy.random.default_rng(seed)`` (PCG64).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import config
from .errors import (
    DegenerateWeights,
    InconsistentCoefficients,
    InvalidAxes,
    MissingCoefficients,
    MissingFieldValues,
    MissingInitialData,
    NotFlippable,
    NotHarmonic,
    PlurilattError,
    SchemaError,
    SingularSystem,
)
from .formats import (
    dump_json,
    field_from_json,
    field_to_csv,
    field_to_json,
    field_to_svg,
    load_json,
    surface_from_json,
    weights_from_json,
    weights_to_json,
)
from .holomorphic import cauchy_riemann_residuals, conjugate
from .lagrangian import ComplexAnalysisLagrangian, DiagonalLagrangian, FAMILIES, family_for
from .lattice import Cube, enumerate_cubes, parity, parse_box
from .variational import (
    DirichletProblem,
    corner_residuals,
    el_residuals,
    energy_invariance,
    extend_across_flip,
    solve_dirichlet,
    verify_cube,
)
from .weights import KINDS, WeightField, propagate, random_initial_field

EXIT_OK = 0
EXIT_IO = 1
EXIT_DEGENERATE = 2
EXIT_INCONSISTENT = 3
EXIT_SINGULAR = 4
EXIT_NOT_FLIPPABLE = 5
EXIT_NOT_HARMONIC = 6


class Report:
    """Collects JSON-lines records and the closing summary."""

    def __init__(self, command: str, argv: list, out=None):
        self.command = command
        self.argv = list(argv)
        self.out = out or sys.stdout
        self.inputs = {}
        self.stats = {}
        self.counts = {}
        self.warnings = []
        self.extra = {}
        self.start = time.perf_counter()

    def digest(self, path) -> None:
        self.inputs[str(path)] = hashlib.sha256(Path(path).read_bytes()).hexdigest()

    def emit(self, record: dict) -> None:
        self.out.write(json.dumps(record, sort_keys=True) + "\n")

    def count(self, name: str, n: int = 1) -> None:
        self.counts[name] = self.counts.get(name, 0) + n

    def residuals(self, name: str, values) -> None:
        values = [float(v) for v in values]
        self.stats[name] = {
            "max": max(values) if values else 0.0,
            "mean": float(np.mean(values)) if values else 0.0,
            "n": len(values),
        }

    def finish(self, status: str, code: int) -> int:
        summary = {
            "summary": True,
            "command": self.command,
            "argv": self.argv,
            "inputs": self.inputs,
            "stats": self.stats,
            "counts": self.counts,
            "status": status,
            "exit_code": code,
            "wall_time": round(time.perf_counter() - self.start, 6),
        }
        if self.warnings:
            summary["warnings"] = self.warnings
        summary.update(self.extra)
        self.emit(summary)
        return code


def _cube_record(cube) -> dict:
    return None if cube is None else {"base": list(cube.base), "dirs": list(cube.dirs)}


def _parse_cube(text: str) -> Cube:
    """``"0,0,0:1,2,3"`` -> cube with that base and those directions."""
    try:
        base, _, dirs = text.partition(":")
        return Cube(tuple(int(x) for x in base.split(",")), tuple(int(x) for x in dirs.split(",")))
    except (ValueError, InvalidAxes) as exc:
        raise NotFlippable(f"invalid cube {text!r}; expected base:dirs: {exc}") from exc


def _parse_anchor(text: str):
    point, _, value = text.partition("=")
    try:
        return tuple(int(x) for x in point.split(",")), complex(value.replace(" ", "") or "0")
    except ValueError as exc:
        raise SchemaError(f"invalid anchor {text!r}; expected n1,n2,...=value") from exc


def _load_weights(args, report) -> WeightField:
    if args.weights is not None:
        report.digest(args.weights)
        return weights_from_json(load_json(args.weights))
    if getattr(args, "random", None):
        region = getattr(args, "region", None)
        if region is None:
            raise SchemaError("--random needs --region")
        return random_initial_field(args.random, region, args.seed)
    raise SchemaError("give --weights FILE or --random KIND")


def _family(weights, name):
    try:
        return family_for(weights, name)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


# --- commands -------------------------------------------------------------------


def cmd_propagate(args, report) -> int:
    if args.region is None:
        raise SchemaError("propagate needs --region")
    weights = _load_weights(args, report)
    try:
        result, defect = propagate(weights, args.region, order=args.order, seed=args.seed, tol=args.tol, return_defect=True)
    except DegenerateWeights as exc:
        report.emit({"error": "DegenerateWeights", "message": str(exc), "cube": _cube_record(exc.cube)})
        return report.finish("degenerate", EXIT_DEGENERATE)
    except InconsistentCoefficients as exc:
        report.emit({"error": "InconsistentCoefficients", "message": str(exc), "cube": _cube_record(getattr(exc, "cube", None))})
        return report.finish("inconsistent", EXIT_INCONSISTENT)
    report.count("plaquettes_in", len(weights))
    report.count("plaquettes_out", len(result))
    report.residuals("overlap_defect", [defect])
    if args.output:
        dump_json(weights_to_json(result), args.output)
    else:
        report.emit(weights_to_json(result))
    return report.finish("ok", EXIT_OK)


def cmd_verify(args, report) -> int:
    if args.region is None:
        raise SchemaError("verify needs --region")
    weights = _load_weights(args, report)
    if args.weights is None or args.propagate:
        weights = propagate(weights, args.region, tol=args.tol)
    family = _family(weights, args.family)
    cubes = enumerate_cubes(args.region)
    if not cubes:
        report.warnings.append("region contains no elementary cubes; nothing checked")
    bad = []
    ratios = []
    for cube in cubes:
        verdict = verify_cube(family.cube_gram(cube), args.rank_tol)
        report.emit(verdict.to_record())
        report.count(verdict.status)
        s = verdict.singular_values
        ratios.append(s[2] / s[0] if s[0] > 0 else 0.0)
        if not verdict.consistent:
            bad.append(_cube_record(cube))
    report.residuals("sigma3_over_sigma1", ratios)
    report.extra["flagged"] = bad
    if bad:
        return report.finish("inconsistent", EXIT_INCONSISTENT)
    return report.finish("ok", EXIT_OK)


def _solve(args, report):
    report.digest(args.surface)
    report.digest(args.boundary)
    surface = surface_from_json(load_json(args.surface))
    weights = _load_weights(args, report)
    family = _family(weights, args.family)
    boundary = field_from_json(load_json(args.boundary))
    boundary = {v: x for v, x in boundary.items() if v in surface.vertices}
    problem = DirichletProblem(surface, family, boundary)
    u = solve_dirichlet(problem, require_coercive=not args.allow_noncoercive)
    return surface, weights, family, u


def _write_field(u, args, surface=None) -> None:
    if args.output:
        dump_json(field_to_json(u), args.output)
    if getattr(args, "csv", None):
        Path(args.csv).write_text(field_to_csv(u), encoding="utf-8")
    if getattr(args, "svg", None) and surface is not None:
        Path(args.svg).write_text(field_to_svg(u, surface), encoding="utf-8")


def cmd_solve(args, report) -> int:
    surface, _, family, u = _solve(args, report)
    residuals = [abs(r) for r in el_residuals(surface, family, u).values()]
    report.residuals("laplace_residual", residuals)
    report.count("interior_vertices", len(surface.interior_vertices))
    report.count("boundary_vertices", len(surface.boundary_vertices))
    report.extra["action"] = [family.action(surface, u).real, family.action(surface, u).imag]
    _write_field(u, args, surface)
    if not args.output:
        report.emit(field_to_json(u))
    return report.finish("ok", EXIT_OK)


def cmd_flip_invariance(args, report) -> int:
    cubes = [_parse_cube(c) for c in args.cube]
    if not cubes:
        raise NotFlippable("flip-invariance needs at least one --cube")
    surface, _, family, u = _solve(args, report)
    differences, corners = [], []
    ok = True
    for cube in cubes:
        new_surface, u = extend_across_flip(u, surface, cube, family, tol=args.tol)
        gram = family.cube_gram(cube)
        corner = float(np.abs(corner_residuals(gram, [u[v] for v in cube.vertices])).max())
        cmp = energy_invariance(u, surface, new_surface, family, rel_tol=args.tol)
        report.emit({
            "cube": _cube_record(cube),
            "action_before": [cmp.action_a.real, cmp.action_a.imag],
            "action_after": [cmp.action_b.real, cmp.action_b.imag],
            "difference": cmp.difference,
            "tolerance": cmp.tolerance,
            "within": cmp.within,
            "corner_residual": corner,
        })
        report.count("within" if cmp.within else "outside")
        ok = ok and cmp.within
        differences.append(cmp.difference)
        corners.append(corner)
        surface = new_surface
    report.residuals("energy_difference", differences)
    report.residuals("corner_residual", corners)
    _write_field(u, args)
    return report.finish("ok" if ok else "outside tolerance", EXIT_OK if ok else EXIT_INCONSISTENT)


def cmd_conjugate(args, report) -> int:
    report.digest(args.surface)
    report.digest(args.field)
    surface = surface_from_json(load_json(args.surface))
    weights = _load_weights(args, report)
    family = _family(weights, args.family)
    if not isinstance(family, DiagonalLagrangian):
        raise SchemaError(f"conjugate needs a diagonal family, got {family.name!r}")
    u = field_from_json(load_json(args.field))
    anchors = dict(_parse_anchor(a) for a in args.anchor)
    if not anchors:
        for point in sorted(surface.vertices):
            anchors.setdefault(parity(point), (point, 0j))
        anchors = dict(anchors.values())
    v = conjugate(u, surface, family, anchors, tol=args.tol)
    _write_field(v, args)
    if isinstance(family, ComplexAnalysisLagrangian):
        f = {n: u[n] + 1j * v[n] for n in surface.vertices}
        cr = cauchy_riemann_residuals(f, surface, weights)
        report.residuals("cauchy_riemann_residual", [abs(x) for x in cr.values()])
        if args.holomorphic:
            dump_json(field_to_json(f), args.holomorphic)
    report.count("vertices", len(v))
    if not args.output:
        report.emit(field_to_json(v))
    return report.finish("ok", EXIT_OK)


def cmd_qnet_verify(args, report) -> int:
    region = args.region or parse_box("0:1,0:1,0:1,0:1")
    rng = np.random.default_rng(args.seed)
    tol = config.consistency_tol() if args.tol is None else args.tol
    defects = []
    for trial in range(args.trials):
        initial = random_initial_field("qnet", region, rng)
        a = propagate(initial, region, order="lex", tol=tol)
        b = propagate(initial, region, order="reverse", tol=tol)
        worst = 0.0
        for key, x in a.values.items():
            y = b.values[key]
            worst = max(worst, max(abs(p - q) / max(abs(p), abs(q), 1e-300) for p, q in zip(x, y)))
        defects.append(worst)
        report.emit({"trial": trial, "ordering_defect": worst, "consistent": worst <= tol})
        report.count("consistent" if worst <= tol else "inconsistent")
    report.residuals("ordering_defect", defects)
    if any(d > tol for d in defects):
        return report.finish("inconsistent", EXIT_INCONSISTENT)
    return report.finish("ok", EXIT_OK)


# --- parser ---------------------------------------------------------------------


def _box(text):
    try:
        return parse_box(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad region {text!r}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plurilatt", description="Discrete pluri-Lagrangian linear systems on Z^N.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, weights=True, region=True):
        if weights:
            p.add_argument("--weights", type=Path, help="weight-field JSON")
            p.add_argument("--random", choices=KINDS, help="random initial weights of this kind over --region")
        if region:
            p.add_argument("--region", type=_box, help="box as lo:hi per axis, e.g. 0:2,0:2,0:2")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None, help="consistency tolerance (default PLURILATT_TOL or 1e-9)")

    p = sub.add_parser("propagate", help="extend weights over a box with the star-triangle maps")
    common(p)
    p.add_argument("--order", choices=("lex", "reverse", "random"), default="lex")
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("verify", help="rank of the corner equations on every cube of a box")
    common(p)
    p.add_argument("--family", choices=sorted(FAMILIES))
    p.add_argument("--propagate", action="store_true", help="propagate the weights over the region first")
    p.add_argument("--rank-tol", type=float, default=config.RANK_TOL)
    p.set_defaults(func=cmd_verify)

    def solve_args(p):
        common(p, region=False)
        p.add_argument("--surface", type=Path, required=True)
        p.add_argument("--boundary", type=Path, required=True, help="field JSON with boundary values")
        p.add_argument("--family", choices=sorted(FAMILIES))
        p.add_argument("--allow-noncoercive", action="store_true")
        p.add_argument("-o", "--output", type=Path)

    p = sub.add_parser("solve", help="Dirichlet problem on a quad-surface")
    solve_args(p)
    p.add_argument("--csv", type=Path)
    p.add_argument("--svg", type=Path, help="heatmap for planar patches")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("flip-invariance", help="solve, flip across cubes, compare Dirichlet energies")
    solve_args(p)
    p.add_argument("--cube", action="append", default=[], help="base:dirs, e.g. 0,0,0:1,2,3 (repeatable)")
    p.set_defaults(func=cmd_flip_invariance)

    p = sub.add_parser("conjugate", help="conjugate pluriharmonic function of a field")
    common(p, region=False)
    p.add_argument("--surface", type=Path, required=True)
    p.add_argument("--field", type=Path, required=True)
    p.add_argument("--family", choices=sorted(FAMILIES))
    p.add_argument("--anchor", action="append", default=[], help="n1,n2,...=value; one black and one white")
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--holomorphic", type=Path, help="also write f = u + i v")
    p.set_defaults(func=cmd_conjugate)

    p = sub.add_parser("qnet-verify", help="4D consistency sweep of the Q-net maps")
    common(p, weights=False)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_qnet_verify)
    return parser


_EXIT_CODES = (
    (DegenerateWeights, EXIT_DEGENERATE),
    (InconsistentCoefficients, EXIT_INCONSISTENT),
    (SingularSystem, EXIT_SINGULAR),
    (NotFlippable, EXIT_NOT_FLIPPABLE),
    (NotHarmonic, EXIT_NOT_HARMONIC),
)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    report = Report(args.command, argv)
    try:
        return args.func(args, report)
    except (OSError, SchemaError, MissingFieldValues, MissingCoefficients, MissingInitialData, ValueError, PlurilattError) as exc:
        code = next((c for cls, c in _EXIT_CODES if isinstance(exc, cls)), EXIT_IO)
        record = {"error": type(exc).__name__, "message": str(exc)}
        point = getattr(exc, "point", None)
        if point is not None:
            record["point"] = list(point)
        cube = getattr(exc, "cube", None)
        if cube is not None:
            record["cube"] = _cube_record(cube)
        report.emit(record)
        print(f"plurilatt {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return report.finish("error", code)


if __name__ == "__main__":
    sys.exit(main())
