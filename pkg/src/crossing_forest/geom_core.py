"""Exact geometric predicates over rational points and hyperplanes.

Everything here is tolerance free: coordinates are exact rationals, a sign
is -1, 0 or +1, and degeneracies are rejected rather than perturbed away
(the one sanctioned perturbation, :func:`symbolic_perturbation`, is explicit
and itself exact).  All values are immutable, so concurrent use is safe.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .rationals import Q, q_str


class GeometryError(ValueError):
    """Base class for geometric contract violations."""


class DegenerateGeometryError(GeometryError):
    """Input hits a degenerate configuration (incidence, parallelism...)."""


class GeneralPositionError(DegenerateGeometryError):
    """Point set violates the general-position requirement."""


def _coerce_coords(coords):
    out = []
    for c in coords:
        out.append(c if isinstance(c, type(Q(0))) else Q(c))
    return tuple(out)


@dataclass(frozen=True)
class Point:
    """A labelled point with exact rational coordinates (d = 2 or 3)."""

    id: int
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", _coerce_coords(self.coords))
        if len(self.coords) not in (2, 3):
            raise GeometryError("points must live in dimension 2 or 3")

    @property
    def dim(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class Hyperplane:
    """Oriented hyperplane <normal, x> = offset with rational data."""

    normal: tuple
    offset: object

    def __post_init__(self):
        object.__setattr__(self, "normal", _coerce_coords(self.normal))
        object.__setattr__(
            self, "offset", self.offset if isinstance(self.offset, type(Q(0))) else Q(self.offset)
        )
        if all(c == 0 for c in self.normal):
            raise GeometryError("hyperplane normal must be nonzero")

    @property
    def dim(self) -> int:
        return len(self.normal)

    def negated(self) -> "Hyperplane":
        return Hyperplane(tuple(-c for c in self.normal), -self.offset)


def _orient2(a: Point, b: Point, c: Point):
    (ax, ay), (bx, by), (cx, cy) = a.coords, b.coords, c.coords
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _coplanar_det(a: Point, b: Point, c: Point, d: Point):
    u = [b.coords[i] - a.coords[i] for i in range(3)]
    v = [c.coords[i] - a.coords[i] for i in range(3)]
    w = [d.coords[i] - a.coords[i] for i in range(3)]
    return (
        u[0] * (v[1] * w[2] - v[2] * w[1])
        - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0])
    )


def _collinear3(a: Point, b: Point, c: Point) -> bool:
    if a.dim == 2:
        return _orient2(a, b, c) == 0
    # cross product of (b-a, c-a) vanishes iff collinear
    u = [b.coords[i] - a.coords[i] for i in range(3)]
    v = [c.coords[i] - a.coords[i] for i in range(3)]
    return (
        u[1] * v[2] - u[2] * v[1] == 0
        and u[2] * v[0] - u[0] * v[2] == 0
        and u[0] * v[1] - u[1] * v[0] == 0
    )


class PointSet:
    """Ordered labelled points; distinctness and general position enforced.

    General position means: no 3 collinear (d = 2 and d = 3), and no 4
    coplanar (d = 3).  Violations raise :class:`GeneralPositionError` at
    construction; no silent repair ever happens.
    """

    __slots__ = ("points", "dimension", "_coord_matrix")

    def __init__(self, points, *, _skip_checks: bool = False):
        pts = tuple(points)
        if not pts:
            raise GeometryError("empty point set")
        dim = pts[0].dim
        self.points = pts
        self.dimension = dim
        self._coord_matrix = None
        if _skip_checks:
            return
        if any(p.dim != dim for p in pts):
            raise GeometryError("mixed dimensions in point set")
        ids = [p.id for p in pts]
        if len(set(ids)) != len(ids):
            raise GeometryError("duplicate point ids")
        seen = {}
        for p in pts:
            if p.coords in seen:
                raise GeneralPositionError(
                    f"points {seen[p.coords]} and {p.id} coincide"
                )
            seen[p.coords] = p.id
        self._check_general_position()

    def _check_general_position(self):
        pts = self.points
        for a, b, c in itertools.combinations(pts, 3):
            if _collinear3(a, b, c):
                raise GeneralPositionError(
                    f"collinear points {a.id}, {b.id}, {c.id}"
                )
        if self.dimension == 3:
            for a, b, c, d in itertools.combinations(pts, 4):
                if _coplanar_det(a, b, c, d) == 0:
                    raise GeneralPositionError(
                        f"coplanar points {a.id}, {b.id}, {c.id}, {d.id}"
                    )

    @classmethod
    def from_coords(cls, coords, ids=None) -> "PointSet":
        if ids is None:
            ids = range(len(list(coords)) if not isinstance(coords, (list, tuple)) else len(coords))
        return cls([Point(i, tuple(c)) for i, c in zip(ids, coords)])

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i: int) -> Point:
        return self.points[i]

    def __iter__(self):
        return iter(self.points)

    def subset(self, indices) -> "PointSet":
        # a subset of a validated set stays valid; skip the O(n^3) recheck
        return PointSet([self.points[i] for i in indices], _skip_checks=True)

    def coord_matrix(self) -> np.ndarray:
        """n x d object array of rational coordinates (cached)."""
        if self._coord_matrix is None:
            mat = np.empty((len(self.points), self.dimension), dtype=object)
            for i, p in enumerate(self.points):
                for j, c in enumerate(p.coords):
                    mat[i, j] = c
            self._coord_matrix = mat
        return self._coord_matrix


def side_of(h: Hyperplane, p: Point) -> int:
    """Exact sign of <normal, p> - offset: -1, 0 or +1."""
    if h.dim != p.dim:
        raise GeometryError(
            f"dimension mismatch: hyperplane is {h.dim}-d, point is {p.dim}-d"
        )
    s = sum(a * b for a, b in zip(h.normal, p.coords)) - h.offset
    if s > 0:
        return 1
    if s < 0:
        return -1
    return 0


def edge_crosses(h: Hyperplane, p: Point, q: Point) -> bool:
    """True iff segment pq has its endpoints strictly on opposite sides."""
    if p.coords == q.coords:
        raise DegenerateGeometryError("edge endpoints coincide")
    sp = side_of(h, p)
    sq = side_of(h, q)
    if sp == 0 or sq == 0:
        raise DegenerateGeometryError(
            f"point {p.id if sp == 0 else q.id} lies on the hyperplane"
        )
    return sp * sq == -1


def crossing_distance(lines, p: Point, q: Point):
    """x + y/2 where x lines strictly separate p,q and y lines contain either.

    A pseudo-metric: symmetric, zero-diagonal up to the y/2 term, and obeys
    the triangle inequality.  Unlike :func:`edge_crosses`, on-line incidences
    are legal here and enter through the y term.
    """
    x = 0
    y = 0
    for h in lines:
        sp = side_of(h, p)
        sq = side_of(h, q)
        if sp == 0 or sq == 0:
            y += 1
        elif sp != sq:
            x += 1
    return Q(2 * x + y, 2)


def arrangement_vertices(lines):
    """All pairwise intersection points of a set of 2-d lines.

    Requires general position (pairwise nonparallel, no 3 concurrent);
    degeneracies raise.  Returned points carry id -1.
    """
    verts = []
    seen = {}
    ls = list(lines)
    for i, j in itertools.combinations(range(len(ls)), 2):
        (a1, b1), c1 = ls[i].normal, ls[i].offset
        (a2, b2), c2 = ls[j].normal, ls[j].offset
        det = a1 * b2 - a2 * b1
        if det == 0:
            raise DegenerateGeometryError(f"lines {i} and {j} are parallel")
        vx = (c1 * b2 - c2 * b1) / det
        vy = (a1 * c2 - a2 * c1) / det
        key = (vx, vy)
        if key in seen:
            raise DegenerateGeometryError("three concurrent lines in arrangement")
        seen[key] = (i, j)
        verts.append(Point(-1, (vx, vy)))
    return verts


def crossing_disk_size(lines, p: Point, r) -> int:
    """Number of arrangement vertices within crossing distance r of p (d=2)."""
    ls = list(lines)
    if p.dim != 2 or any(h.dim != 2 for h in ls):
        raise GeometryError("crossing disks are defined in dimension 2 only")
    r = r if isinstance(r, type(Q(0))) else Q(r)
    count = 0
    for v in arrangement_vertices(ls):
        if crossing_distance(ls, p, v) <= r:
            count += 1
    return count


DEFAULT_PERTURBATION = Q(1, 1 << 40)


def symbolic_perturbation(ps: PointSet, eps=None) -> PointSet:
    """Shift point i by (eps*i, eps^2*i^2[, eps^3*i^3]) exactly.

    The offsets follow the moment curve in the index, so any degenerate
    determinant picks up a nonvanishing Vandermonde term; with desk-scale
    integer coordinates and eps = 2^-40 the perturbed set is in general
    position (still verified by the PointSet constructor).
    """
    if eps is None:
        eps = DEFAULT_PERTURBATION
    else:
        eps = Q(eps) if not isinstance(eps, type(Q(0))) else eps
    new_pts = []
    for i, p in enumerate(ps.points):
        coords = tuple(
            c + (eps ** (k + 1)) * (Q(i) ** (k + 1)) for k, c in enumerate(p.coords)
        )
        new_pts.append(Point(p.id, coords))
    return PointSet(new_pts)


def orientation(a: Point, b: Point, c: Point) -> int:
    """Exact turn sign of the 2-d triple (a, b, c): -1, 0 or +1."""
    if a.dim != 2 or b.dim != 2 or c.dim != 2:
        raise GeometryError("orientation is a 2-d predicate")
    s = _orient2(a, b, c)
    if s > 0:
        return 1
    if s < 0:
        return -1
    return 0


def segments_properly_cross(p: Point, q: Point, r: Point, s: Point) -> bool:
    """True iff open segments pq and rs cross in a single interior point.

    Segments sharing an endpoint never properly cross.  With the ground set
    in general position no endpoint can sit in another segment's interior,
    so the four strict orientation tests are exhaustive.
    """
    if len({p.coords, q.coords, r.coords, s.coords}) < 4:
        return False
    o1 = orientation(p, q, r)
    o2 = orientation(p, q, s)
    o3 = orientation(r, s, p)
    o4 = orientation(r, s, q)
    return o1 * o2 < 0 and o3 * o4 < 0


def parse_point_set(text: str, validate: bool = True) -> PointSet:
    """Point-set file: JSON array of [x, y(, z)], numbers or "p/q" strings.

    validate=False defers the general-position check, for callers that will
    perturb the set before using it.
    """
    raw = json.loads(text, parse_float=Q, parse_int=int)
    if not isinstance(raw, list) or not raw:
        raise GeometryError("point file must be a nonempty JSON array")
    pts = []
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) not in (2, 3):
            raise GeometryError(f"entry {i} is not a coordinate pair/triple")
        pts.append(Point(i, tuple(Q(v) if isinstance(v, str) else v for v in row)))
    return PointSet(pts, _skip_checks=not validate)


def load_point_set(path, validate: bool = True) -> PointSet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_point_set(fh.read(), validate=validate)


def dump_point_set(ps: PointSet) -> str:
    rows = [[q_str(c) for c in p.coords] for p in ps.points]
    return json.dumps(rows)
