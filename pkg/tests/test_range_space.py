import itertools

import pytest

from crossing_forest import (
    GeometryError,
    Hyperplane,
    Point,
    PointSet,
    Q,
    canonical_ranges,
    crossing_number,
    explicit_ranges,
    restrict,
    symbolic_perturbation,
)
from crossing_forest.range_space import (
    dump_ranges,
    induced_membership,
    parse_set_system,
)
from crossing_forest.verify import random_lines

TRIANGLE = PointSet([Point(0, (0, 0)), Point(1, (1, 0)), Point(2, (Q(1, 2), Q(7, 8)))])
SQUARE = PointSet(
    [Point(0, (0, 0)), Point(1, (1, 0)), Point(2, (1, 1)), Point(3, (0, 1))]
)


def brute_partitions(P):
    """Independent oracle: membership signatures from a dense sample of lines.

    Lines through all pairs of a fine rational grid around the point set,
    skipping any line that hits a point; signatures are stored in canonical
    orientation (the side without index 0).
    """
    full = (1 << len(P)) - 1
    grid = []
    for i in range(-2, 12):
        for j in range(-2, 12):
            grid.append((Q(i, 4) + Q(1, 97), Q(j, 4) + Q(1, 89)))
    sigs = set()
    for (ax, ay), (bx, by) in itertools.combinations(grid, 2):
        if ax == bx and ay == by:
            continue
        normal = (ay - by, bx - ax)
        offset = normal[0] * ax + normal[1] * ay
        members = 0
        degenerate = False
        for k, p in enumerate(P):
            v = normal[0] * p.coords[0] + normal[1] * p.coords[1] - offset
            if v == 0:
                degenerate = True
                break
            if v > 0:
                members |= 1 << k
        if degenerate or members == 0 or members == full:
            continue
        if members & 1:
            members ^= full
        sigs.add(members)
    return sigs


def test_triangle_has_three_ranges():
    R = canonical_ranges(TRIANGLE)
    assert len(R.ranges) == 3
    assert {r.members for r in R.ranges} == brute_partitions(TRIANGLE)


def test_square_has_six_ranges_no_diagonal():
    R = canonical_ranges(SQUARE)
    got = {r.members for r in R.ranges}
    assert len(got) == 6
    # the diagonal split {0,2} | {1,3} is not realisable by a line
    assert 0b1010 not in got
    assert got == brute_partitions(SQUARE)


def test_two_points_single_range():
    R = canonical_ranges(PointSet([Point(0, (0, 0)), Point(1, (1, 1))]))
    assert len(R.ranges) == 1
    assert R.ranges[0].members == 0b10


def test_collinear_rejected():
    with pytest.raises(GeometryError):
        canonical_ranges(
            PointSet([Point(0, (0, 0)), Point(1, (1, 0)), Point(2, (2, 0))])
        )


def test_representatives_avoid_points_and_witness_partitions():
    for P in (TRIANGLE, SQUARE):
        R = canonical_ranges(P)
        for r in R.ranges:
            assert r.rep is not None
            assert induced_membership(R, r.rep) == r.members


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_completeness_against_random_probes(seed):
    from crossing_forest.cli import generate

    P = generate("uniform", 8, seed=seed)
    R = canonical_ranges(P)
    stored = {r.members for r in R.ranges}
    probes = 0
    for salt in range(40):
        for h in random_lines(seed + 1000, 5, salt=salt):
            try:
                members = induced_membership(R, h)
            except GeometryError:
                continue
            probes += 1
            full = (1 << len(P)) - 1
            if members in (0, full):
                continue
            assert members in stored
    assert probes >= 150


def test_completeness_3d():
    P = PointSet([Point(i, (i, i * i, i * i * i)) for i in range(5)])
    R = canonical_ranges(P)
    stored = {r.members for r in R.ranges}
    # probe with planes through random rational triples offset slightly
    from crossing_forest.range_space import _base_hyperplane

    probes = 0
    raw = random_lines(7, 45)
    for k in range(0, 45, 3):
        a, b, c = raw[k], raw[k + 1], raw[k + 2]
        tri = [
            Point(0, (a.normal[0], a.normal[1], a.offset)),
            Point(1, (b.normal[0], b.normal[1], b.offset)),
            Point(2, (c.normal[0], c.normal[1], c.offset)),
        ]
        try:
            normal, offset = _base_hyperplane(tri)
            h = Hyperplane(normal, offset + Q(1, 7919))
            members = induced_membership(R, h)
        except GeometryError:
            continue
        probes += 1
        full = (1 << len(P)) - 1
        if members in (0, full):
            continue
        assert members in stored
    assert probes >= 10


def test_range_count_cap_d2():
    from crossing_forest.cli import generate

    for n, seed in ((6, 0), (9, 1), (12, 2)):
        P = generate("uniform", n, seed=seed)
        R = canonical_ranges(P)
        assert len(R.ranges) <= 2 * (n * (n - 1) // 2) + n


def test_explicit_ranges_normalisation():
    R = explicit_ranges(4, [[0], [0, 1], [0, 1, 2, 3]])
    assert len(R.ranges) == 2  # full set dropped; [0] and [0,1] survive
    R2 = explicit_ranges(2, [[0], [1]])
    assert len(R2.ranges) == 1  # complements merge
    import random

    rng = random.Random(5)
    sets = [[i for i in range(5) if rng.random() < 0.5] for _ in range(10)]
    R3 = explicit_ranges(5, sets)
    assert len(R3.ranges) <= 10
    full = (1 << 5) - 1
    for r in R3.ranges:
        assert 0 < r.members < full and not r.members & 1


def test_explicit_ranges_out_of_bounds():
    with pytest.raises(ValueError):
        explicit_ranges(3, [[0, 3]])


def serpentine_crossing_oracle(P, edges):
    """Crossing number via representative-line sides only (no bitsets)."""
    from crossing_forest import side_of

    R = canonical_ranges(P)
    best = 0
    for r in R.ranges:
        cnt = 0
        for u, v in edges:
            if side_of(r.rep, P[u]) != side_of(r.rep, P[v]):
                cnt += 1
        best = max(best, cnt)
    return best


def test_crossing_number_cases():
    R = canonical_ranges(TRIANGLE)
    assert crossing_number([], R) == 0
    assert crossing_number([(0, 1), (1, 2)], R) == 2  # the {B} singleton
    # 3x3 grid serpentine path crosses any line at most 3 times
    pts = [Point(k, (k % 3, k // 3)) for k in range(9)]
    G = symbolic_perturbation(PointSet(pts, _skip_checks=True))
    snake = [(0, 1), (1, 2), (2, 5), (4, 5), (3, 4), (3, 6), (6, 7), (7, 8)]
    RG = canonical_ranges(G)
    assert serpentine_crossing_oracle(G, snake) == 3
    assert crossing_number(snake, RG) == 3


def test_crossing_number_subadditive():
    import random

    rng = random.Random(3)
    from crossing_forest.cli import generate

    P = generate("uniform", 7, seed=9)
    R = canonical_ranges(P)
    pairs = list(itertools.combinations(range(7), 2))
    for _ in range(20):
        F = set(rng.sample(pairs, 4))
        G = set(rng.sample(pairs, 4))
        assert crossing_number(F | G, R) <= crossing_number(F, R) + crossing_number(
            G, R
        )


def test_restrict():
    R = canonical_ranges(SQUARE)
    same = restrict(R, range(4))
    assert {r.members for r in same.ranges} == {r.members for r in R.ranges}
    tri = restrict(canonical_ranges(TRIANGLE), [0, 1])
    assert len(tri.ranges) == 1
    # square restricted to 3 corners equals canonical ranges of the triangle
    sub = restrict(R, [0, 1, 2])
    direct = canonical_ranges(SQUARE.subset([0, 1, 2]))
    assert {r.members for r in sub.ranges} == {r.members for r in direct.ranges}
    assert len(sub.ranges) == 3
    with pytest.raises(ValueError):
        restrict(R, [])


def test_set_system_file_and_dump():
    R = parse_set_system('{"ground": 4, "sets": [[0], [1, 2]]}')
    assert R.ground_size == 4 and len(R.ranges) == 2
    text = dump_ranges(R)
    assert all(int(line, 16) for line in text.splitlines())
