"""Independent brute-force oracles and certificate checks.

Nothing here shares algorithmic code with the pipeline: the tree oracle
enumerates every labeled spanning tree from its sequence encoding, and the
certificate checks re-evaluate LP rows from scratch.  These back the test
suite and the command line --verify mode.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._rng import TAG_RANDOM_LINES, u64_stream
from .geom_core import (
    DegenerateGeometryError,
    GeometryError,
    Hyperplane,
    PointSet,
    arrangement_vertices,
    crossing_disk_size,
    side_of,
)
from .lp_engine import FractionalSolution, build_dual, build_primal, build_separation, min_feasible_t, solve
from .pipeline import SpanningTree, extract_spanning_tree
from .range_space import RangeSpace, canonical_ranges
from .rationals import Q

_MAX_ORACLE_N = 8


@dataclass
class OracleResult:
    t_opt: int
    witness: SpanningTree
    trees_examined: int


def _prufer_edges(seq, n):
    """Decode a length n-2 sequence over [0, n) into its labeled tree."""
    deg = [1] * n
    for x in seq:
        deg[x] += 1
    edges = []
    ptr = 0
    leaf = -1
    for v in seq:
        if leaf < 0:
            while deg[ptr] != 1:
                ptr += 1
            leaf = ptr
            ptr += 1
        edges.append((leaf, v))
        deg[leaf] -= 1
        deg[v] -= 1
        if deg[v] == 1 and v < ptr:
            leaf = v
        else:
            leaf = -1
    rest = [i for i in range(n) if deg[i] == 1]
    edges.append((rest[0], rest[1]))
    return edges


def brute_force_opt_tree(R: RangeSpace) -> OracleResult:
    """Minimum crossing number over all n^(n-2) labeled spanning trees.

    Per-edge crossing masks are packed into 8-bit lanes (one per range), so
    evaluating a tree is a few big-int additions and a byte scan.
    """
    n = R.ground_size
    if n > _MAX_ORACLE_N:
        raise ValueError(f"oracle enumerates trees only up to n = {_MAX_ORACLE_N}")
    if n == 1:
        return OracleResult(0, SpanningTree(1, (), 0, (-1,)), 1)
    nr = len(R.ranges)
    lane = {}
    for i, j in itertools.combinations(range(n), 2):
        acc = 0
        for k, r in enumerate(R.ranges):
            if ((r.members >> i) & 1) != ((r.members >> j) & 1):
                acc += 1 << (8 * k)
        lane[(i, j)] = acc
    best = None
    best_edges = None
    examined = 0
    for seq in itertools.product(range(n), repeat=n - 2):
        examined += 1
        edges = _prufer_edges(seq, n)
        if nr:
            total = 0
            for u, v in edges:
                total += lane[(u, v) if u < v else (v, u)]
            crossing = max(total.to_bytes(nr, "little"))
        else:
            crossing = 0
        if best is None or crossing < best:
            best = crossing
            best_edges = edges
            if best == 0:
                break
    witness = extract_spanning_tree(n, [tuple(sorted(e)) for e in best_edges])
    return OracleResult(int(best), witness, examined)


def _solution_feasible(sol: FractionalSolution) -> bool:
    """Re-evaluate every row of the solution's LP, exactly and locally."""
    if sol.status != "optimal":
        return False
    lp = sol.lp
    xs = {}
    for j, name in enumerate(lp.var_names):
        v = sol.values[name]
        if v < 0:
            return False
        if v != 0:
            xs[j] = v
    keys = np.fromiter(xs.keys(), dtype=np.int64, count=len(xs))
    for row in lp.rows:
        tot = Q(0)
        if len(row.idx) and len(keys):
            mask = np.isin(row.idx, keys)
            for j, a in zip(row.idx[mask], row.coef[mask]):
                tot = tot + a * xs[int(j)]
        if row.rel == "<=" and tot > row.rhs:
            return False
        if row.rel == ">=" and tot < row.rhs:
            return False
    return True


def check_duality_certificate(
    primal: FractionalSolution, dual: FractionalSolution, t
) -> bool:
    """True iff both solutions are exactly feasible for the same instance at
    the same t and their objectives coincide."""
    t = t if isinstance(t, type(Q(0))) else Q(t)
    if primal.status != "optimal" or dual.status != "optimal":
        return False
    pm, dm = primal.lp.meta, dual.lp.meta
    if pm.get("kind") != "primal" or dm.get("kind") != "dual":
        return False
    if pm.get("rs") != dm.get("rs"):
        return False
    if pm.get("t") != t or dm.get("t") != t:
        return False
    if not _solution_feasible(primal) or not _solution_feasible(dual):
        return False
    return primal.objective == dual.objective


def check_separation_lower_bound(P: PointSet) -> bool:
    """sep(P) >= sqrt(n)/2, compared exactly as 4 * opt^2 >= n."""
    if P.dimension != 2:
        raise GeometryError("separation bound check is planar only")
    R = canonical_ranges(P)
    sol = solve(build_separation(R))
    if sol.status != "optimal":
        return False
    return 4 * sol.objective * sol.objective >= len(P)


def check_crossing_disk_lemma(lines, P: PointSet, r: int) -> bool:
    """Every p in P has at least r(r+1)/2 arrangement vertices within
    crossing distance r (requires |lines| >= 2r, general position, and no
    incidences)."""
    ls = list(lines)
    if P.dimension != 2 or any(h.dim != 2 for h in ls):
        raise GeometryError("crossing disk lemma is planar only")
    if len(ls) < 2 * r:
        raise ValueError("need at least 2r lines")
    arrangement_vertices(ls)  # raises on parallel / concurrent degeneracy
    for p in P:
        for h in ls:
            if side_of(h, p) == 0:
                raise DegenerateGeometryError(f"point {p.id} lies on a line")
    need = r * (r + 1) // 2
    return all(crossing_disk_size(ls, p, r) >= need for p in P)


def random_lines(seed: int, count: int, salt: int = 0):
    """Seeded random lines in general position (checked, re-salted on
    degeneracy)."""
    for attempt in range(64):
        draws = u64_stream(seed, TAG_RANDOM_LINES, 3 * count, salt=salt * 64 + attempt)
        lines = []
        for k in range(count):
            a = Q(int(draws[3 * k]) % 2001 - 1000, 1000)
            b = Q(int(draws[3 * k + 1]) % 2001 - 1000, 1000)
            c = Q(int(draws[3 * k + 2]) % 2001 - 1000, 1000)
            if a == 0 and b == 0:
                break
            lines.append(Hyperplane((a, b), c))
        if len(lines) < count:
            continue
        try:
            arrangement_vertices(lines)
        except DegenerateGeometryError:
            continue
        return lines
    raise RuntimeError("could not draw nondegenerate random lines")


def run_all_checks(instance, seed: int = 0) -> dict:
    """Every check applicable to the instance, as a JSON-ready block."""
    out = {}
    if isinstance(instance, PointSet):
        R = canonical_ranges(instance)
    else:
        R = instance
    t_star = min_feasible_t(R, "exact")
    primal = solve(build_primal(R, t_star))
    dual = solve(build_dual(R, t_star))
    out["t_star"] = str(t_star)
    out["duality_certificate"] = check_duality_certificate(primal, dual, t_star)
    out["lp_objective"] = None if primal.objective is None else str(primal.objective)
    if R.points is not None and R.points.dimension == 2:
        out["separation_lower_bound"] = check_separation_lower_bound(R.points)
        for salt in range(16):
            lines = random_lines(seed, 10, salt=salt)
            if all(side_of(h, p) != 0 for p in R.points for h in lines):
                out["crossing_disk_lemma"] = check_crossing_disk_lemma(
                    lines, R.points, 3
                )
                break
        else:
            out["crossing_disk_lemma"] = None
    if R.ground_size <= _MAX_ORACLE_N:
        oracle = brute_force_opt_tree(R)
        out["oracle"] = {
            "t_opt": oracle.t_opt,
            "witness_edges": [list(e) for e in oracle.witness.edges],
            "trees_examined": oracle.trees_examined,
        }
        out["lp_threshold_le_t_opt"] = bool(t_star <= oracle.t_opt)
    return out
