"""Materialised set systems: all hyperplane partitions of a point set, or
explicit user-supplied ranges over an abstract ground set.

A range is stored once per unordered partition, as the side that does not
contain ground index 0; geometric ranges carry a representative hyperplane
that witnesses the partition and avoids every ground point.  Built values
are immutable and safe to share across threads.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass

import numpy as np

from .geom_core import (
    DegenerateGeometryError,
    GeometryError,
    Hyperplane,
    PointSet,
    side_of,
)
from .rationals import Q


@dataclass(frozen=True)
class Range:
    """One partition of the ground set: a proper nonempty membership bitset."""

    members: int
    rep: Hyperplane | None = None

    def indices(self, ground_size: int):
        return [i for i in range(ground_size) if (self.members >> i) & 1]


class RangeSpace:
    """Ground set plus an explicit, deduplicated list of ranges."""

    __slots__ = (
        "ground_size",
        "points",
        "ranges",
        "_member_matrix",
        "_pair_cross",
        "_fingerprint",
        "_edge_lengths",
    )

    def __init__(self, ground_size: int, ranges, points: PointSet | None = None):
        if ground_size < 1:
            raise ValueError("ground set must be nonempty")
        if points is not None and len(points) != ground_size:
            raise ValueError("ground size does not match point set")
        full = (1 << ground_size) - 1
        seen = set()
        for r in ranges:
            if r.members <= 0 or r.members >= full:
                raise ValueError("range must be a proper nonempty subset")
            if r.members & 1:
                raise ValueError("range not in canonical orientation (bit 0 set)")
            if r.members in seen:
                raise ValueError("duplicate range bitset")
            seen.add(r.members)
        self.ground_size = ground_size
        self.points = points
        self.ranges = tuple(ranges)
        self._member_matrix = None
        self._pair_cross = None
        self._fingerprint = None
        self._edge_lengths = None

    @property
    def geometric(self) -> bool:
        return self.points is not None

    def __len__(self) -> int:
        return len(self.ranges)

    def member_matrix(self) -> np.ndarray:
        """bool matrix, ranges x ground: membership of each index."""
        if self._member_matrix is None:
            m = np.zeros((len(self.ranges), self.ground_size), dtype=bool)
            for k, r in enumerate(self.ranges):
                bits = r.members
                while bits:
                    low = bits & -bits
                    m[k, low.bit_length() - 1] = True
                    bits ^= low
            self._member_matrix = m
        return self._member_matrix

    def pair_list(self):
        return list(itertools.combinations(range(self.ground_size), 2))

    def pair_crossing_matrix(self):
        """(pairs, bool matrix ranges x pairs): which pairs cross which range."""
        if self._pair_cross is None:
            pairs = self.pair_list()
            if pairs:
                ii = np.fromiter((p[0] for p in pairs), dtype=np.int64)
                jj = np.fromiter((p[1] for p in pairs), dtype=np.int64)
                mm = self.member_matrix()
                cross = mm[:, ii] != mm[:, jj]
            else:
                cross = np.zeros((len(self.ranges), 0), dtype=bool)
            self._pair_cross = (pairs, cross)
        return self._pair_cross

    def fingerprint(self) -> str:
        """Content hash (ground, bitsets, coordinates); used as a cache key."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            h.update(str(self.ground_size).encode())
            for r in self.ranges:
                h.update(b"," + hex(r.members).encode())
            if self.points is not None:
                for p in self.points:
                    h.update(b";" + ",".join(str(c) for c in p.coords).encode())
            self._fingerprint = h.hexdigest()
        return self._fingerprint


def _canonical_flip(members: int, full: int, rep: Hyperplane | None):
    if members & 1:
        members ^= full
        rep = rep.negated() if rep is not None else None
    return members, rep


def _solve_affine(coords, values):
    """A tuple (g, g0) with <g, p_i> + g0 = values[i] for all given points.

    The system is underdetermined by one degree of freedom; free columns are
    pinned to zero, which yields a deterministic particular solution.  The
    points must be affinely independent (guaranteed by general position).
    """
    k = len(coords)
    d = len(coords[0])
    width = d + 1
    aug = [[Q(c) for c in coords[i]] + [Q(1), Q(values[i])] for i in range(k)]
    pivot_cols = []
    row = 0
    for col in range(width):
        sel = None
        for r in range(row, k):
            if aug[r][col] != 0:
                sel = r
                break
        if sel is None:
            continue
        aug[row], aug[sel] = aug[sel], aug[row]
        pv = aug[row][col]
        aug[row] = [v / pv for v in aug[row]]
        for r in range(k):
            if r != row and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        pivot_cols.append(col)
        row += 1
        if row == k:
            break
    if row < k:
        raise DegenerateGeometryError("affinely dependent interpolation points")
    sol = [Q(0)] * width
    for r, col in enumerate(pivot_cols):
        sol[col] = aug[r][width]
    return tuple(sol[:d]), sol[d]


def _base_hyperplane(pts):
    """Hyperplane through d affinely independent points."""
    if len(pts) == 2:
        (px, py), (qx, qy) = pts[0].coords, pts[1].coords
        normal = (py - qy, qx - px)
        offset = normal[0] * px + normal[1] * py
        return normal, offset
    a, b, c = pts
    u = [b.coords[i] - a.coords[i] for i in range(3)]
    v = [c.coords[i] - a.coords[i] for i in range(3)]
    normal = (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )
    offset = sum(n * x for n, x in zip(normal, a.coords))
    return normal, offset


def _signature(coord_mat, normal, offset, ground_size: int):
    """Bitset of points strictly on the positive side; None on any incidence."""
    vals = coord_mat[:, 0] * normal[0] + coord_mat[:, 1] * normal[1]
    if len(normal) == 3:
        vals = vals + coord_mat[:, 2] * normal[2]
    vals = vals - offset
    members = 0
    for i in range(ground_size):
        v = vals[i]
        if v == 0:
            return None
        if v > 0:
            members |= 1 << i
    return members


_EPS0 = Q(1, 1 << 40)
_MAX_SHRINK = 64


def _stabilized_hyperplane(coord_mat, base_normal, base_offset, g, g0, n):
    """Perturb base by eps*(affine g) and shrink eps by squaring until the
    membership signature stabilises and no point is incident."""
    eps = _EPS0
    for _ in range(_MAX_SHRINK):
        n1 = tuple(a + eps * b for a, b in zip(base_normal, g))
        sig1 = None
        if any(c != 0 for c in n1):
            sig1 = _signature(coord_mat, n1, base_offset - eps * g0, n)
        e2 = eps * eps
        n2 = tuple(a + e2 * b for a, b in zip(base_normal, g))
        sig2 = None
        if any(c != 0 for c in n2):
            sig2 = _signature(coord_mat, n2, base_offset - e2 * g0, n)
        if sig1 is not None and sig1 == sig2:
            return Hyperplane(n1, base_offset - eps * g0), sig1
        eps = e2
    raise DegenerateGeometryError("perturbation failed to stabilise")


def canonical_ranges(P: PointSet) -> RangeSpace:
    """Every distinct partition of P induced by a hyperplane avoiding P.

    For each d-subset, the hyperplane through it is tilted so that each
    on-plane point lands on either prescribed side (2^d sign choices; the
    all-equal choices degenerate to translates), then the perturbation is
    shrunk until the partition stabilises.  Dedup is by membership bitset.
    Completeness over random probe hyperplanes is exercised by the tests.
    """
    n = len(P)
    if n < 2:
        raise GeometryError("need at least 2 points to form a partition")
    d = P.dimension
    coord_mat = P.coord_matrix()
    full = (1 << n) - 1
    found: dict[int, Range] = {}

    def record(members: int, rep: Hyperplane):
        if members == 0 or members == full:
            return
        members, rep = _canonical_flip(members, full, rep)
        if members not in found:
            found[members] = Range(members, rep)

    if n <= d:
        # too few points for a d-subset; interpolate target sides directly
        coords = [p.coords for p in P.points]
        for signs in itertools.product((1, -1), repeat=n):
            if len(set(signs)) == 1:
                continue
            g, g0 = _solve_affine(coords, [Q(s) for s in signs])
            rep = Hyperplane(g, -g0)
            members = sum(1 << i for i, s in enumerate(signs) if s > 0)
            record(members, rep)
        return RangeSpace(n, list(found.values()), points=P)

    for subset in itertools.combinations(range(n), d):
        pts = [P.points[i] for i in subset]
        base_normal, base_offset = _base_hyperplane(pts)
        coords = [p.coords for p in pts]
        for signs in itertools.product((1, -1), repeat=d):
            g, g0 = _solve_affine(coords, [Q(s) for s in signs])
            rep, members = _stabilized_hyperplane(
                coord_mat, base_normal, base_offset, g, g0, n
            )
            record(members, rep)
    return RangeSpace(n, list(found.values()), points=P)


def explicit_ranges(ground_size: int, sets) -> RangeSpace:
    """Abstract set system: normalise, drop trivial sets, dedupe."""
    if ground_size < 1:
        raise ValueError("ground set must be nonempty")
    full = (1 << ground_size) - 1
    found: dict[int, Range] = {}
    for s in sets:
        bits = 0
        for idx in s:
            if not 0 <= idx < ground_size:
                raise ValueError(f"index {idx} outside ground set of {ground_size}")
            bits |= 1 << idx
        if bits == 0 or bits == full:
            continue
        bits, _ = _canonical_flip(bits, full, None)
        if bits not in found:
            found[bits] = Range(bits, None)
    return RangeSpace(ground_size, list(found.values()))


def _edge_pairs(edges):
    out = []
    for e in edges:
        u, v = e
        if u == v:
            raise ValueError("self-loop edge")
        out.append((u, v) if u < v else (v, u))
    return out


def crossing_number(edges, R: RangeSpace) -> int:
    """max over ranges of the number of edges with exactly one endpoint in."""
    pairs = _edge_pairs(getattr(edges, "edges", edges))
    if not pairs or not R.ranges:
        return 0
    for u, v in pairs:
        if not (0 <= u < R.ground_size and 0 <= v < R.ground_size):
            raise ValueError("edge endpoint outside ground set")
    mm = R.member_matrix()
    ii = np.fromiter((p[0] for p in pairs), dtype=np.int64)
    jj = np.fromiter((p[1] for p in pairs), dtype=np.int64)
    counts = (mm[:, ii] != mm[:, jj]).sum(axis=1)
    return int(counts.max())


def restrict(R: RangeSpace, X) -> RangeSpace:
    """Induced set system on the index subset X (renormalised, deduped).

    Geometric representatives stay valid: a hyperplane avoiding all of P
    avoids X and still witnesses the induced partition.
    """
    xs = sorted(set(X))
    if not xs:
        raise ValueError("cannot restrict to an empty subset")
    if xs[0] < 0 or xs[-1] >= R.ground_size:
        raise ValueError("subset index outside ground set")
    m = len(xs)
    full = (1 << m) - 1
    found: dict[int, Range] = {}
    for r in R.ranges:
        bits = 0
        for new_i, old_i in enumerate(xs):
            if (r.members >> old_i) & 1:
                bits |= 1 << new_i
        if bits == 0 or bits == full:
            continue
        bits, rep = _canonical_flip(bits, full, r.rep)
        if bits not in found:
            found[bits] = Range(bits, rep)
    pts = R.points.subset(xs) if R.points is not None else None
    return RangeSpace(m, list(found.values()), points=pts)


def parse_set_system(text: str) -> RangeSpace:
    """Set-system file: JSON { "ground": n, "sets": [[...], ...] }."""
    raw = json.loads(text)
    if not isinstance(raw, dict) or "ground" not in raw or "sets" not in raw:
        raise ValueError('set-system file needs {"ground": n, "sets": [...]}')
    return explicit_ranges(int(raw["ground"]), raw["sets"])


def load_set_system(path) -> RangeSpace:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_set_system(fh.read())


def dump_ranges(R: RangeSpace) -> str:
    """Debug dump: one hex-encoded membership bitset per line."""
    return "\n".join(f"{r.members:x}" for r in R.ranges)


def induced_membership(R: RangeSpace, h: Hyperplane) -> int:
    """Canonical membership bitset that hyperplane h induces on R's points.

    Helper for completeness probes; raises if h touches a ground point.
    """
    if R.points is None:
        raise ValueError("membership probe requires a geometric range space")
    members = 0
    for i, p in enumerate(R.points):
        s = side_of(h, p)
        if s == 0:
            raise DegenerateGeometryError("probe hyperplane hits a ground point")
        if s > 0:
            members |= 1 << i
    full = (1 << R.ground_size) - 1
    members, _ = _canonical_flip(members, full, None)
    return members
