"""Turn a fractional edge solution into an actual edge set.

Two routes: seeded randomized rounding (edge pq kept with probability
y_pq, deterministically when y_pq >= 1), and the deterministic planar
route that exploits the planarity of an optimal shortest-solution support.
Rounding is pure given (solution, seed); trials with distinct seeds can run
concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass

from ._rng import TAG_ROUNDING, u64_stream
from .geom_core import GeometryError, PointSet, segments_properly_cross
from .lp_engine import FractionalSolution, edge_values
from .range_space import RangeSpace, crossing_number
from .rationals import Q, mix64


class RoundingBudgetError(RuntimeError):
    """Retry budget exhausted without reaching the component target."""


class SupportNotPlanarError(RuntimeError):
    """Weighted-LP support contains two properly crossing segments.

    Signals a non-optimal or degenerate-alternate solution; the caller gets
    an error instead of a silent perturbation.
    """


@dataclass(frozen=True)
class EdgeSet:
    """Undirected edges over ground indices plus provenance."""

    edges: frozenset
    source: str
    seed: int | None = None

    def sorted_edges(self):
        return sorted(self.edges)


@dataclass
class RoundingStats:
    components: int
    singletons: int
    crossing: int
    retries: int


def _require_solution(sol: FractionalSolution, kinds):
    if sol.status != "optimal":
        raise ValueError(f"rounding needs a solved LP, got status {sol.status!r}")
    kind = sol.lp.meta.get("kind")
    if kind not in kinds:
        raise ValueError(f"expected a {'/'.join(kinds)} solution, got {kind!r}")


def components_of(n: int, edges):
    """Union-find connected components; returns sorted lists of indices."""
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [groups[k] for k in sorted(groups)]


_TWO64 = 1 << 64


def randomized_round(sol: FractionalSolution, R: RangeSpace, seed: int) -> EdgeSet:
    """Keep edge pq with probability min(y_pq, 1), one uint64 draw per edge.

    Draws are consumed in edge-sorted order and compared exactly: pq is kept
    iff u < y_pq * 2^64, so y_pq >= 1 is deterministic inclusion.
    """
    _require_solution(sol, ("primal", "weighted", "feasibility"))
    vals = edge_values(sol)
    pairs = sorted(vals)
    draws = u64_stream(seed, TAG_ROUNDING, len(pairs))
    picked = []
    for pq, u in zip(pairs, draws):
        y = vals[pq]
        if int(u) * y.denominator < y.numerator * _TWO64:
            picked.append(pq)
    return EdgeSet(frozenset(picked), "randomized", seed)


def round_until_reduced(
    sol: FractionalSolution,
    R: RangeSpace,
    seed: int,
    max_retries: int = 64,
) -> tuple[EdgeSet, RoundingStats]:
    """Re-round with chained seeds until components <= (19/20) n.

    seed_{k+1} = hash(seed_k); per-attempt success probability is a
    constant (Markov), so 64 retries fail only on pathological input, and
    that failure is an error, not a silent fallback.
    """
    n = R.ground_size
    s = int(seed)
    for attempt in range(max_retries + 1):
        F = randomized_round(sol, R, s)
        comps = components_of(n, F.edges)
        if 20 * len(comps) <= 19 * n:
            singles = sum(1 for g in comps if len(g) == 1)
            stats = RoundingStats(
                components=len(comps),
                singletons=singles,
                crossing=crossing_number(F, R),
                retries=attempt,
            )
            return F, stats
        s = mix64(s)
    raise RoundingBudgetError(
        f"no rounding with <= 19/20 * {n} components in {max_retries + 1} attempts"
    )


def deterministic_planar_round(
    sol: FractionalSolution, P: PointSet, R: RangeSpace
) -> EdgeSet:
    """Planar-case rounding: verify the support is non-crossing, keep edges
    with 12 x_pq >= 1.

    Requires an optimal basic solution of the weighted LP in dimension 2;
    optimality is what forces the support to be planar, and the cover rows
    then guarantee the rounded set touches at least half the points.
    """
    if P.dimension != 2:
        raise GeometryError("deterministic planar rounding needs dimension 2")
    _require_solution(sol, ("weighted",))
    vals = edge_values(sol)
    support = sorted(pq for pq, v in vals.items() if v > 0)
    for a in range(len(support)):
        i, j = support[a]
        for b in range(a + 1, len(support)):
            k, l = support[b]
            if segments_properly_cross(P[i], P[j], P[k], P[l]):
                raise SupportNotPlanarError(
                    f"support edges {support[a]} and {support[b]} cross"
                )
    threshold = Q(1, 12)
    picked = frozenset(pq for pq in support if vals[pq] >= threshold)
    return EdgeSet(picked, "deterministic-planar", None)
