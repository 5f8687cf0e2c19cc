import pytest

from crossing_forest import (
    Point,
    PointSet,
    Q,
    RoundingBudgetError,
    SupportNotPlanarError,
    build_primal,
    build_weighted_primal,
    canonical_ranges,
    crossing_number,
    deterministic_planar_round,
    randomized_round,
    round_until_reduced,
    solve,
)
from crossing_forest.lp_engine import FractionalSolution, edge_values
from crossing_forest.rounding import components_of

TRIANGLE = PointSet([Point(0, (0, 0)), Point(1, (1, 0)), Point(2, (Q(1, 2), Q(7, 8)))])
SQUARE = PointSet(
    [Point(0, (0, 0)), Point(1, (1, 0)), Point(2, (1, 1)), Point(3, (0, 1))]
)
R_TRI = canonical_ranges(TRIANGLE)
R_SQ = canonical_ranges(SQUARE)


def fake_solution(lp, assignments):
    values = {name: Q(0) for name in lp.var_names}
    for name, v in assignments.items():
        values[name] = Q(v)
    return FractionalSolution("optimal", values, None, lp)


def test_integral_solution_rounds_identically_for_all_seeds():
    lp = build_primal(R_SQ, 4)
    sol = fake_solution(lp, {"y_0_1": 1, "y_2_3": 1, "y_1_2": 0})
    sets = {randomized_round(sol, R_SQ, seed).edges for seed in range(25)}
    assert sets == {frozenset({(0, 1), (2, 3)})}


def test_edges_at_or_above_one_always_kept():
    lp = build_primal(R_SQ, 4)
    sol = fake_solution(lp, {"y_0_3": Q(3, 2), "y_1_2": Q(1, 3)})
    for seed in range(25):
        assert (0, 3) in randomized_round(sol, R_SQ, seed).edges


def test_triangle_expected_size_matches_gamma():
    sol = solve(build_primal(R_TRI, 1))
    total = 0
    trials = 10000
    for seed in range(trials):
        total += len(randomized_round(sol, R_TRI, seed).edges)
    mean = total / trials
    assert abs(mean - 1.5) < 0.05  # E|F| = gamma = 3/2


def test_rounding_is_deterministic_per_seed():
    sol = solve(build_primal(R_TRI, 1))
    assert randomized_round(sol, R_TRI, 7).edges == randomized_round(sol, R_TRI, 7).edges
    distinct = {randomized_round(sol, R_TRI, s).edges for s in range(32)}
    assert len(distinct) > 1


def test_round_until_reduced_immediate_on_integral():
    R2 = canonical_ranges(PointSet([Point(0, (0, 0)), Point(1, (1, 1))]))
    sol = solve(build_primal(R2, 1))
    F, stats = round_until_reduced(sol, R2, seed=3)
    assert F.edges == {(0, 1)}
    assert stats.retries == 0 and stats.components == 1 and stats.singletons == 0


def test_round_until_reduced_triangle():
    sol = solve(build_primal(R_TRI, 1))
    F, stats = round_until_reduced(sol, R_TRI, seed=5, max_retries=64)
    assert stats.components <= 2  # 19/20 * 3 = 2.85 allows at most 2
    assert stats.crossing == crossing_number(F, R_TRI)


def test_round_until_reduced_budget_error():
    lp = build_primal(R_TRI, 1)
    sol = fake_solution(lp, {})  # all-zero edge mass can never reduce
    with pytest.raises(RoundingBudgetError):
        round_until_reduced(sol, R_TRI, seed=0, max_retries=0)


def test_rejects_unsolved_input():
    lp = build_primal(R_TRI, 1)
    bad = FractionalSolution("infeasible", {}, None, lp)
    with pytest.raises(ValueError):
        randomized_round(bad, R_TRI, 0)


def test_planar_round_keeps_integral_path():
    # x = 1 on a spanning path: every edge clears the 1/12 threshold
    R = canonical_ranges(PointSet([Point(0, (0, 0)), Point(1, (1, 0)), Point(2, (2, 1))]))
    lp = build_weighted_primal(R, 3)
    sol = fake_solution(lp, {"y_0_1": 1, "y_1_2": 1})
    sol.lp.meta["kind"] = "weighted"
    F = deterministic_planar_round(sol, R.points, R)
    assert F.edges == {(0, 1), (1, 2)}


def test_planar_round_square():
    sol = solve(build_weighted_primal(R_SQ, 1))
    F = deterministic_planar_round(sol, SQUARE, R_SQ)
    assert F.edges == {(0, 1), (1, 2), (2, 3), (0, 3)}
    comps = components_of(4, F.edges)
    assert len(comps) == 1 <= 3  # <= (3/4) * 4
    assert crossing_number(F, R_SQ) == 2 <= 12  # 12t with t = 1


def test_planar_round_rejects_crossing_support():
    lp = build_weighted_primal(R_SQ, 2)
    sol = fake_solution(lp, {"y_0_2": Q(1, 2), "y_1_3": Q(1, 2)})
    with pytest.raises(SupportNotPlanarError):
        deterministic_planar_round(sol, SQUARE, R_SQ)


def test_planar_round_requires_weighted_solution():
    sol = solve(build_primal(R_SQ, 1))
    with pytest.raises(ValueError):
        deterministic_planar_round(sol, SQUARE, R_SQ)


def test_planar_round_dimension_guard():
    P3 = PointSet([Point(0, (0, 0, 0)), Point(1, (1, 0, 1)), Point(2, (0, 1, 2))])
    R3 = canonical_ranges(P3)
    sol = solve(build_weighted_primal(R3, 2))
    from crossing_forest import GeometryError

    with pytest.raises(GeometryError):
        deterministic_planar_round(sol, P3, R3)


@pytest.mark.parametrize("seed", [0, 4])
def test_planar_support_structure(seed):
    # optimal support is planar, covers every point, and at least half the
    # points have support degree <= 12; all of those get a rounded edge
    from crossing_forest.cli import generate
    from crossing_forest.lp_engine import min_feasible_t

    P = generate("uniform", 12, seed=seed)
    R = canonical_ranges(P)
    t = min_feasible_t(R, "exact")
    sol = solve(build_weighted_primal(R, t))
    vals = edge_values(sol)
    support = [pq for pq, v in vals.items() if v > 0]
    deg = [0] * len(P)
    for u, v in support:
        deg[u] += 1
        deg[v] += 1
    assert all(d >= 1 for d in deg)
    low = [i for i in range(len(P)) if deg[i] <= 12]
    assert 2 * len(low) >= len(P)
    F = deterministic_planar_round(sol, P, R)
    touched = {u for e in F.edges for u in e}
    assert all(i in touched for i in low)
    assert crossing_number(F, R) <= 12 * t
    assert 4 * len(components_of(len(P), F.edges)) <= 3 * len(P)
