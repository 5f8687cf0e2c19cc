"""Command line front end.

Subcommands: gen (datasets), run (full pipeline), lp (build and dump one of
the LPs), verify (certificate checks), oracle (brute-force optimum).  All
output is machine-readable JSON except the optional SVG rendering.  Exit
codes: 0 success, 1 usage error, 2 infeasible or degenerate input.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ._rng import TAG_UNIFORM_POINTS, u64_stream
from .geom_core import (
    DegenerateGeometryError,
    GeneralPositionError,
    GeometryError,
    Point,
    PointSet,
    dump_point_set,
    load_point_set,
    symbolic_perturbation,
)
from .lp_engine import (
    build_dual,
    build_min_t_lp,
    build_primal,
    build_separation,
    build_weighted_primal,
    format_lp,
    min_feasible_t,
    solve,
)
from .pipeline import PipelineError, build_tree
from .range_space import (
    RangeSpace,
    canonical_ranges,
    crossing_number,
    load_set_system,
)
from .rationals import Q, q_str
from .rounding import (
    RoundingBudgetError,
    SupportNotPlanarError,
    components_of,
    deterministic_planar_round,
    round_until_reduced,
)
from .verify import brute_force_opt_tree, run_all_checks

THREADS_ENV = "CROSSING_FOREST_THREADS"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DEGENERATE = 2

_DEGENERATE_ERRORS = (
    DegenerateGeometryError,
    GeneralPositionError,
    SupportNotPlanarError,
    RoundingBudgetError,
    PipelineError,
)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    input_path: str | None = None
    gen_spec: str | None = None
    abstract: bool = False
    mode: str = "randomized"
    seed: int = 0
    t_override: str | None = None
    verify: bool = False
    dump_lp: str | None = None
    svg: str | None = None
    out: str | None = None
    trials: int = 1
    timings: bool = False
    lines: int = 0
    dim: int = 2
    perturb: bool = False


def generate(kind: str, n: int, seed: int = 0, d: int = 2) -> PointSet:
    """Seeded dataset families; every generator re-checks general position."""
    if n < 1:
        raise UsageError("n must be at least 1")
    if kind == "grid":
        if d != 2:
            raise UsageError("grid generation is 2-d only")
        side = math.isqrt(n)
        if side * side < n:
            side += 1
        pts = [Point(k, (k % side, k // side)) for k in range(n)]
        return symbolic_perturbation(PointSet(pts, _skip_checks=True))
    if kind == "uniform":
        if d not in (2, 3):
            raise UsageError("uniform generation needs dimension 2 or 3")
        for attempt in range(64):
            draws = u64_stream(seed, TAG_UNIFORM_POINTS, n * d, salt=attempt)
            coords = [
                tuple(Q(int(draws[i * d + k]) >> 44, 1 << 20) for k in range(d))
                for i in range(n)
            ]
            try:
                return PointSet([Point(i, c) for i, c in enumerate(coords)])
            except GeneralPositionError:
                continue
        raise GeneralPositionError("uniform generator failed 64 attempts")
    if kind == "circle":
        if d != 2:
            raise UsageError("circle generation is 2-d only")
        for bits in (20, 30, 40, 52):
            coords = []
            for k in range(n):
                ang = 2 * math.pi * k / n
                coords.append(
                    (
                        Q(round(math.cos(ang) * (1 << bits)), 1 << bits),
                        Q(round(math.sin(ang) * (1 << bits)), 1 << bits),
                    )
                )
            try:
                return PointSet([Point(i, c) for i, c in enumerate(coords)])
            except GeneralPositionError:
                continue
        raise GeneralPositionError("circle approximation stayed degenerate")
    if kind == "moment-curve":
        if d != 3:
            raise UsageError("moment-curve generation is 3-d only")
        return PointSet([Point(i, (i, i * i, i * i * i)) for i in range(n)])
    raise UsageError(f"unknown generator kind {kind!r}")


def _parse_gen_spec(spec: str, seed: int, d: int) -> PointSet:
    if ":" not in spec:
        raise UsageError("generator spec must look like kind:n, e.g. grid:25")
    kind, _, count = spec.partition(":")
    try:
        n = int(count)
    except ValueError as exc:
        raise UsageError(f"bad generator count {count!r}") from exc
    return generate(kind, n, seed=seed, d=d)


def _load_instance(cfg: RunConfig):
    """Returns (PointSet | None, RangeSpace | None); exactly one input source."""
    if (cfg.input_path is None) == (cfg.gen_spec is None):
        raise UsageError("provide exactly one of --in PATH or --gen KIND:N")
    if cfg.gen_spec is not None:
        if cfg.abstract:
            raise UsageError("--abstract only applies to --in set-system files")
        return _parse_gen_spec(cfg.gen_spec, cfg.seed, cfg.dim), None
    if cfg.abstract:
        return None, load_set_system(cfg.input_path)
    if cfg.perturb:
        return symbolic_perturbation(load_point_set(cfg.input_path, validate=False)), None
    return load_point_set(cfg.input_path), None


def _svg_transform(P: PointSet):
    xs = [float(p.coords[0]) for p in P]
    ys = [float(p.coords[1]) for p in P]
    lo_x, hi_x = min(xs), max(xs)
    lo_y, hi_y = min(ys), max(ys)
    if hi_x - lo_x < 1e-9:
        lo_x -= 1.0
        hi_x += 1.0
    if hi_y - lo_y < 1e-9:
        lo_y -= 1.0
        hi_y += 1.0
    size, margin = 640.0, 40.0
    scale = (size - 2 * margin) / max(hi_x - lo_x, hi_y - lo_y)

    def tr(x, y):
        return (
            margin + (x - lo_x) * scale,
            size - margin - (y - lo_y) * scale,
        )

    return tr, (lo_x, hi_x, lo_y, hi_y)


def _clip_line(h, box):
    """Two clip points of a 2-d line against the bounding box, or None."""
    a, b = (float(c) for c in h.normal)
    c = float(h.offset)
    lo_x, hi_x, lo_y, hi_y = box
    pts = []
    if abs(b) > 1e-12:
        for x in (lo_x, hi_x):
            y = (c - a * x) / b
            if lo_y - 1e-9 <= y <= hi_y + 1e-9:
                pts.append((x, y))
    if abs(a) > 1e-12:
        for y in (lo_y, hi_y):
            x = (c - b * y) / a
            if lo_x - 1e-9 <= x <= hi_x + 1e-9:
                pts.append((x, y))
    uniq = []
    for p in pts:
        if all(abs(p[0] - q[0]) + abs(p[1] - q[1]) > 1e-9 for q in uniq):
            uniq.append(p)
    if len(uniq) < 2:
        return None
    return uniq[0], uniq[1]


def render_svg(P: PointSet, T, R: RangeSpace | None, path: str, lines: int = 0):
    """Deterministic SVG: points as circles, tree edges as segments, and
    optionally the `lines` most-crossed canonical lines dashed and labeled."""
    if P.dimension != 2:
        raise GeometryError("SVG rendering is 2-d only")
    tr, box = _svg_transform(P)
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="640" height="640" '
        'viewBox="0 0 640 640">',
        '<rect width="640" height="640" fill="white"/>',
    ]
    edges = list(T.edges) if T is not None else []
    if lines and R is not None and R.ranges and edges:
        mm = R.member_matrix()
        counts = []
        for k, rng in enumerate(R.ranges):
            c = sum(1 for u, v in edges if mm[k, u] != mm[k, v])
            counts.append((c, k))
        counts.sort(key=lambda p: (-p[0], p[1]))
        for c, k in counts[:lines]:
            rep = R.ranges[k].rep
            if rep is None:
                continue
            clip = _clip_line(rep, box)
            if clip is None:
                continue
            (x1, y1), (x2, y2) = clip
            (sx1, sy1), (sx2, sy2) = tr(x1, y1), tr(x2, y2)
            parts.append(
                f'<line x1="{sx1:.2f}" y1="{sy1:.2f}" x2="{sx2:.2f}" y2="{sy2:.2f}" '
                'stroke="#d62728" stroke-width="1" stroke-dasharray="6 3"/>'
            )
            mx, my = (sx1 + sx2) / 2, (sy1 + sy2) / 2
            parts.append(
                f'<text x="{mx:.2f}" y="{my:.2f}" font-size="12" '
                f'fill="#d62728">{c}</text>'
            )
    for u, v in edges:
        (x1, y1) = tr(float(P[u].coords[0]), float(P[u].coords[1]))
        (x2, y2) = tr(float(P[v].coords[0]), float(P[v].coords[1]))
        parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            'stroke="#1f77b4" stroke-width="2"/>'
        )
    for p in P:
        x, y = tr(float(p.coords[0]), float(p.coords[1]))
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="black"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def _single_step_report(R: RangeSpace, cfg: RunConfig, t) -> dict:
    """One LP + one rounding at a forced t (run --t)."""
    if cfg.mode == "deterministic-planar":
        lp = build_weighted_primal(R, t)
    else:
        lp = build_primal(R, t)
    sol = solve(lp)
    report = {
        "single_step": True,
        "mode": cfg.mode,
        "seed": cfg.seed,
        "t": q_str(t),
        "lp_status": sol.status,
    }
    if sol.status != "optimal":
        raise PipelineError(f"LP at t = {q_str(t)} is {sol.status}")
    report["objective"] = q_str(sol.objective)
    if cfg.mode == "deterministic-planar":
        F = deterministic_planar_round(sol, R.points, R)
        retries = 0
    else:
        F, stats = round_until_reduced(sol, R, cfg.seed)
        retries = stats.retries
    comps = components_of(R.ground_size, F.edges)
    report["edges"] = [list(e) for e in F.sorted_edges()]
    report["components"] = len(comps)
    report["crossing"] = crossing_number(F, R)
    report["retries"] = retries
    return report


def _one_run(P, R, cfg: RunConfig, seed: int):
    instance = P if P is not None else R
    if cfg.t_override is not None:
        R_full = canonical_ranges(P) if P is not None else R
        sub_cfg = RunConfig(**{**cfg.__dict__, "seed": seed})
        return None, _single_step_report(R_full, sub_cfg, Q(cfg.t_override))
    return build_tree(
        instance, mode=cfg.mode, seed=seed, collect_timings=cfg.timings
    )


def run(cfg: RunConfig) -> int:
    """Execute a run config; returns the process exit code."""
    try:
        P, R = _load_instance(cfg)
        if cfg.mode not in ("randomized", "deterministic-planar"):
            raise UsageError(f"unknown mode {cfg.mode!r}")
        if cfg.svg is not None and (P is None or P.dimension != 2):
            raise UsageError("--svg needs planar point input")
        if cfg.svg is not None and cfg.trials != 1:
            raise UsageError("--svg works with a single trial")
        if cfg.trials < 1:
            raise UsageError("--trials must be positive")
        seeds = [cfg.seed + k for k in range(cfg.trials)]
        workers = max(1, int(os.environ.get(THREADS_ENV, "1")))
        if cfg.trials == 1:
            results = [_one_run(P, R, cfg, seeds[0])]
        elif workers == 1:
            results = [_one_run(P, R, cfg, s) for s in seeds]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_one_run, P, R, cfg, s) for s in seeds]
                results = [f.result() for f in futures]
        if cfg.trials == 1:
            tree, report = results[0]
        else:
            report = {"trials": [rep for _, rep in results]}
            tree = results[0][0]
        if cfg.verify:
            instance = P if P is not None else R
            report["verification"] = run_all_checks(instance, seed=cfg.seed)
        if cfg.dump_lp is not None:
            _dump_run_lp(P, R, cfg)
        if cfg.svg is not None:
            R_full = canonical_ranges(P) if cfg.lines and len(P) > 1 else None
            render_svg(P, tree, R_full, cfg.svg, lines=cfg.lines)
        _emit(report, cfg.out)
        return EXIT_OK
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DEGENERATE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


def _dump_run_lp(P, R, cfg: RunConfig):
    R_full = canonical_ranges(P) if P is not None else R
    if cfg.t_override is not None:
        t = Q(cfg.t_override)
    else:
        t = min_feasible_t(R_full, "exact")
    if cfg.mode == "deterministic-planar":
        lp = build_weighted_primal(R_full, t)
    else:
        lp = build_primal(R_full, t)
    with open(cfg.dump_lp, "w", encoding="utf-8") as fh:
        fh.write(format_lp(lp))


def _emit(payload, out_path):
    text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="crossing-forest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a dataset")
    gen.add_argument("--kind", required=True, choices=["grid", "uniform", "circle", "moment-curve"])
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--dim", type=int, default=2)
    gen.add_argument("--out")

    runp = sub.add_parser("run", help="build a low-crossing spanning tree")
    _common_input(runp)
    runp.add_argument("--mode", default="randomized",
                      choices=["randomized", "deterministic-planar"])
    runp.add_argument("--seed", type=int, default=0)
    runp.add_argument("--t", dest="t_override",
                      help="skip recursion; single LP+rounding step at this t")
    runp.add_argument("--verify", action="store_true")
    runp.add_argument("--dump-lp", dest="dump_lp")
    runp.add_argument("--svg")
    runp.add_argument("--lines", type=int, default=0,
                      help="dashed most-crossed canonical lines in the SVG")
    runp.add_argument("--out")
    runp.add_argument("--trials", type=int, default=1)
    runp.add_argument("--timings", action="store_true",
                      help="include wall-clock timings (breaks byte determinism)")

    lpp = sub.add_parser("lp", help="build one LP and dump it as text")
    _common_input(lpp)
    lpp.add_argument("--which", required=True,
                     choices=["primal", "weighted", "dual", "separation", "min-t"])
    lpp.add_argument("--t", help="parameter t (default: exact minimal feasible t)")
    lpp.add_argument("--seed", type=int, default=0)
    lpp.add_argument("--out")

    ver = sub.add_parser("verify", help="run all applicable certificate checks")
    _common_input(ver)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out")

    orc = sub.add_parser("oracle", help="brute-force minimum crossing tree (n <= 8)")
    _common_input(orc)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--out")
    return parser


def _common_input(p):
    p.add_argument("--in", dest="input_path", help="point JSON or set-system JSON")
    p.add_argument("--gen", dest="gen_spec", help="generator spec kind:n")
    p.add_argument("--abstract", action="store_true",
                   help="treat --in as a set-system file")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--perturb", action="store_true",
                   help="apply symbolic perturbation to loaded points")


def _cfg_from_args(args) -> RunConfig:
    return RunConfig(
        input_path=getattr(args, "input_path", None),
        gen_spec=getattr(args, "gen_spec", None),
        abstract=getattr(args, "abstract", False),
        mode=getattr(args, "mode", "randomized"),
        seed=getattr(args, "seed", 0),
        t_override=getattr(args, "t_override", None),
        verify=getattr(args, "verify", False),
        dump_lp=getattr(args, "dump_lp", None),
        svg=getattr(args, "svg", None),
        out=getattr(args, "out", None),
        trials=getattr(args, "trials", 1),
        timings=getattr(args, "timings", False),
        lines=getattr(args, "lines", 0),
        dim=getattr(args, "dim", 2),
        perturb=getattr(args, "perturb", False),
    )


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "gen":
            P = generate(args.kind, args.n, seed=args.seed, d=args.dim)
            _emit_text(dump_point_set(P) + "\n", args.out)
            return EXIT_OK
        if args.command == "run":
            return run(_cfg_from_args(args))
        cfg = _cfg_from_args(args)
        P, R = _load_instance(cfg)
        if args.command == "lp":
            return _lp_command(P, R, args)
        if args.command == "verify":
            instance = P if P is not None else R
            _emit(run_all_checks(instance, seed=args.seed), args.out)
            return EXIT_OK
        if args.command == "oracle":
            R_full = canonical_ranges(P) if P is not None else R
            res = brute_force_opt_tree(R_full)
            _emit(
                {
                    "t_opt": res.t_opt,
                    "witness_edges": [list(e) for e in res.witness.edges],
                    "trees_examined": res.trees_examined,
                },
                args.out,
            )
            return EXIT_OK
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DEGENERATE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


def _lp_command(P, R, args) -> int:
    R_full = canonical_ranges(P) if P is not None else R
    if args.which == "min-t":
        lp = build_min_t_lp(R_full)
    else:
        t = Q(args.t) if args.t is not None else min_feasible_t(R_full, "exact")
        if args.which == "primal":
            lp = build_primal(R_full, t)
        elif args.which == "weighted":
            lp = build_weighted_primal(R_full, t)
        elif args.which == "dual":
            lp = build_dual(R_full, t)
        else:
            lp = build_separation(R_full)
    _emit_text(format_lp(lp), args.out)
    return EXIT_OK


def _emit_text(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
