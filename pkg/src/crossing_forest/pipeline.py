"""Recursive driver: solve, round, contract to component representatives,
repeat until one point remains, then extract a spanning tree of the union.

Each level re-derives its own minimal feasible t on the induced set system;
the union of rounded edge sets spans the ground set and the final tree is
the breadth-first tree from index 0 (neighbors in ascending order).  A
fixed seed reproduces the whole run byte for byte (timings are opt-in
because they are inherently nondeterministic).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .geom_core import PointSet
from .lp_engine import (
    build_primal,
    build_weighted_primal,
    min_feasible_t,
    solve,
)
from .range_space import RangeSpace, canonical_ranges, crossing_number, restrict
from .rationals import mix64, q_str
from .rounding import (
    EdgeSet,
    RoundingBudgetError,
    components_of,
    deterministic_planar_round,
    round_until_reduced,
)

MODES = ("randomized", "deterministic-planar")


class PipelineError(RuntimeError):
    pass


class PipelineAbort(PipelineError):
    """A level failed to round; carries the partial report."""

    def __init__(self, message, partial_report):
        super().__init__(message)
        self.partial_report = partial_report


class InternalCheckError(RuntimeError):
    """A provable invariant failed at runtime: an implementation bug."""


@dataclass(frozen=True)
class SpanningTree:
    n: int
    edges: tuple
    root: int
    parent: tuple

    def __post_init__(self):
        if len(self.edges) != self.n - 1:
            raise ValueError("a spanning tree on n vertices has n-1 edges")


@dataclass
class LevelTrace:
    index: int
    members: tuple
    t: object
    edges: tuple
    components: int
    crossing: int
    seed: int | None
    retries: int
    singletons: int

    def to_dict(self):
        return {
            "i": self.index,
            "n_i": len(self.members),
            "t_i": q_str(self.t),
            "edges": [list(e) for e in self.edges],
            "components": self.components,
            "crossing_i": self.crossing,
            "seed": self.seed,
            "retries": self.retries,
            "singletons": self.singletons,
        }


def extract_spanning_tree(n: int, edges) -> SpanningTree:
    """BFS tree from index 0, neighbors visited in ascending order."""
    pairs = {tuple(sorted(e)) for e in (getattr(edges, "edges", edges))}
    adj = [[] for _ in range(n)]
    for u, v in pairs:
        adj[u].append(v)
        adj[v].append(u)
    for a in adj:
        a.sort()
    if n == 1:
        return SpanningTree(1, (), 0, (-1,))
    parent = [-2] * n
    parent[0] = -1
    queue = [0]
    tree_edges = []
    while queue:
        nxt = []
        for u in queue:
            for v in adj[u]:
                if parent[v] == -2:
                    parent[v] = u
                    tree_edges.append((min(u, v), max(u, v)))
                    nxt.append(v)
        queue = nxt
    if any(p == -2 for p in parent):
        raise ValueError("edge set does not connect the ground set")
    return SpanningTree(n, tuple(sorted(tree_edges)), 0, tuple(parent))


def euler_shortcut(T: SpanningTree, X, R: RangeSpace) -> list:
    """Closed walk over exactly X, in first-visit order of the doubled tree.

    Shortcutting a doubled Euler tour can only drop crossings, so the cycle's
    crossing number is at most twice the tree's; that inequality is checked
    against R before returning.
    """
    xs = sorted(set(X))
    if not xs:
        raise ValueError("X must be nonempty")
    if xs[0] < 0 or xs[-1] >= T.n:
        raise ValueError("X outside tree indices")
    if len(xs) == 1:
        return [xs[0]]
    adj = [[] for _ in range(T.n)]
    for u, v in T.edges:
        adj[u].append(v)
        adj[v].append(u)
    for a in adj:
        a.sort()
    root = xs[0]
    in_x = set(xs)
    order = []
    seen = [False] * T.n
    stack = [root]
    while stack:
        u = stack.pop()
        if seen[u]:
            continue
        seen[u] = True
        if u in in_x:
            order.append(u)
        for v in reversed(adj[u]):
            if not seen[v]:
                stack.append(v)
    cycle_edges = set()
    for k in range(len(order)):
        u, v = order[k], order[(k + 1) % len(order)]
        if u != v:
            cycle_edges.add((min(u, v), max(u, v)))
    bound = 2 * crossing_number(T.edges, R)
    got = crossing_number(cycle_edges, R)
    if got > bound:
        raise InternalCheckError(
            f"shortcut cycle crossing {got} exceeds doubled tree bound {bound}"
        )
    return order


def _level_bound(n: int) -> int:
    if n <= 1:
        return 1
    return math.ceil(math.log(n) / math.log(20 / 19)) + 1


def build_tree(
    instance,
    mode: str = "randomized",
    seed: int = 0,
    max_retries: int = 64,
    collect_timings: bool = False,
):
    """Run the full recursion and return (SpanningTree, report dict)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    t0 = time.perf_counter()
    if isinstance(instance, PointSet):
        if len(instance) == 1:
            return _trivial_run(instance, mode, seed, t0, collect_timings)
        R0 = canonical_ranges(instance)
    elif isinstance(instance, RangeSpace):
        R0 = instance
        if R0.ground_size == 1:
            return _trivial_run(instance, mode, seed, t0, collect_timings)
    else:
        raise TypeError("instance must be a PointSet or a RangeSpace")
    if mode == "deterministic-planar":
        if R0.points is None or R0.points.dimension != 2:
            raise PipelineError(
                "deterministic-planar mode needs planar coordinates"
            )
    n = R0.ground_size
    members = list(range(n))
    traces = []
    level = 0
    level_times = []
    while len(members) > 1:
        level += 1
        if level > _level_bound(n):
            raise InternalCheckError("level count exceeded contraction bound")
        lt0 = time.perf_counter()
        R_i = restrict(R0, members)
        t_i = min_feasible_t(R_i, "exact")
        if mode == "randomized":
            sol = solve(build_primal(R_i, t_i))
            if sol.status != "optimal":
                raise PipelineError(
                    f"level {level} LP is {sol.status}; "
                    "a pair of ground elements is never separated"
                )
            level_seed = mix64(seed, level)
            try:
                F_loc, stats = round_until_reduced(sol, R_i, level_seed, max_retries)
            except RoundingBudgetError as exc:
                raise PipelineAbort(
                    str(exc),
                    _report(instance, mode, seed, traces, None, None, t0, None),
                ) from exc
            comps = components_of(len(members), F_loc.edges)
        else:
            sol = solve(build_weighted_primal(R_i, t_i))
            if sol.status != "optimal":
                raise PipelineError(f"level {level} LP is {sol.status}")
            F_loc = deterministic_planar_round(sol, R_i.points, R_i)
            comps = components_of(len(members), F_loc.edges)
            level_seed = None
            stats = None
        global_edges = tuple(
            sorted(
                (min(members[u], members[v]), max(members[u], members[v]))
                for u, v in F_loc.edges
            )
        )
        traces.append(
            LevelTrace(
                index=level,
                members=tuple(members),
                t=t_i,
                edges=global_edges,
                components=len(comps),
                crossing=crossing_number(F_loc, R_i),
                seed=level_seed,
                retries=stats.retries if stats else 0,
                singletons=stats.singletons
                if stats
                else sum(1 for g in comps if len(g) == 1),
            )
        )
        members = sorted(members[g[0]] for g in comps)
        if collect_timings:
            level_times.append(time.perf_counter() - lt0)
    union_edges = sorted({e for tr in traces for e in tr.edges})
    tree = extract_spanning_tree(n, union_edges)
    total_crossing = crossing_number(tree.edges, R0)
    report = _report(
        instance,
        mode,
        seed,
        traces,
        tree,
        total_crossing,
        t0,
        level_times if collect_timings else None,
    )
    return tree, report


def _trivial_run(instance, mode, seed, t0, collect_timings):
    tree = SpanningTree(1, (), 0, (-1,))
    report = _report(
        instance, mode, seed, [], tree, 0, t0, [] if collect_timings else None
    )
    return tree, report


def _report(instance, mode, seed, traces, tree, total_crossing, t0, level_times):
    geometric = isinstance(instance, PointSet) or (
        isinstance(instance, RangeSpace) and instance.points is not None
    )
    if isinstance(instance, PointSet):
        n = len(instance)
        dim = instance.dimension
    else:
        n = instance.ground_size
        dim = instance.points.dimension if instance.points is not None else None
    report = {
        "n": n,
        "dimension": dim,
        "abstract": not geometric,
        "mode": mode,
        "seed": seed,
        "levels": [tr.to_dict() for tr in traces],
        "total_crossing": total_crossing,
        "tree": None
        if tree is None
        else {
            "root": tree.root,
            "edges": [list(e) for e in tree.edges],
            "parent": list(tree.parent),
        },
        "length_precision_bits": 60 if mode == "deterministic-planar" else None,
        "timings_ms": None
        if level_times is None
        else {
            "levels": [round(1000 * t, 3) for t in level_times],
            "total": round(1000 * (time.perf_counter() - t0), 3),
        },
    }
    return report
