import pytest

from crossing_forest import (
    Hyperplane,
    Point,
    PointSet,
    Q,
    brute_force_opt_tree,
    build_dual,
    build_primal,
    build_tree,
    canonical_ranges,
    check_crossing_disk_lemma,
    check_duality_certificate,
    check_separation_lower_bound,
    crossing_number,
    explicit_ranges,
    min_feasible_t,
    solve,
)
from crossing_forest.cli import generate
from crossing_forest.verify import random_lines, run_all_checks

TRIANGLE = PointSet([Point(0, (0, 0)), Point(1, (1, 0)), Point(2, (Q(1, 2), Q(7, 8)))])
SQUARE = PointSet(
    [Point(0, (0, 0)), Point(1, (1, 0)), Point(2, (1, 1)), Point(3, (0, 1))]
)
R_TRI = canonical_ranges(TRIANGLE)
R_SQ = canonical_ranges(SQUARE)


def test_oracle_two_points():
    R = canonical_ranges(PointSet([Point(0, (0, 0)), Point(1, (1, 1))]))
    res = brute_force_opt_tree(R)
    assert res.t_opt == 1 and res.trees_examined == 1


def test_oracle_triangle():
    # every 3-vertex tree is a path whose middle vertex is crossed twice
    res = brute_force_opt_tree(R_TRI)
    assert res.t_opt == 2
    assert res.trees_examined == 3
    assert crossing_number(res.witness.edges, R_TRI) == 2


def test_oracle_square():
    res = brute_force_opt_tree(R_SQ)
    assert res.t_opt == 2
    assert res.trees_examined == 16
    assert crossing_number(res.witness.edges, R_SQ) == res.t_opt


def test_oracle_integrality_gap_regression():
    # fractional threshold 1 sits strictly below the best integral tree
    assert min_feasible_t(R_TRI, "exact") == 1 < brute_force_opt_tree(R_TRI).t_opt


def test_oracle_size_guard():
    R = explicit_ranges(9, [[0]])
    with pytest.raises(ValueError):
        brute_force_opt_tree(R)


def test_oracle_minimum_over_all_trees():
    # cross-check the minimum against a direct scan on a random instance
    import itertools

    P = generate("uniform", 5, seed=6)
    R = canonical_ranges(P)
    res = brute_force_opt_tree(R)
    seen = []
    for seq in itertools.product(range(5), repeat=3):
        from crossing_forest.verify import _prufer_edges

        seen.append(crossing_number(_prufer_edges(list(seq), 5), R))
    assert res.t_opt == min(seen)
    assert res.trees_examined == len(seen) or res.t_opt == 0


def test_duality_certificate():
    p = solve(build_primal(R_TRI, 1))
    d = solve(build_dual(R_TRI, 1))
    assert check_duality_certificate(p, d, 1)
    assert p.objective == Q(3, 2)
    # mismatched t between the two sides
    d2 = solve(build_dual(R_TRI, 2))
    assert not check_duality_certificate(p, d2, 1)
    # infeasible primal can certify nothing
    bad = solve(build_primal(R_TRI, Q(1, 2)))
    assert not check_duality_certificate(bad, d, Q(1, 2))


def test_duality_certificate_random_instances():
    for seed in (0, 1):
        P = generate("uniform", 8, seed=seed)
        R = canonical_ranges(P)
        t = min_feasible_t(R, "exact")
        p = solve(build_primal(R, t))
        d = solve(build_dual(R, t))
        assert check_duality_certificate(p, d, t)


def test_separation_lower_bound():
    assert check_separation_lower_bound(SQUARE)
    assert check_separation_lower_bound(PointSet([Point(0, (0, 0)), Point(1, (1, 1))]))
    assert check_separation_lower_bound(generate("grid", 9))


def test_crossing_disk_lemma_checks():
    two = [Hyperplane((1, 0), 1), Hyperplane((0, 1), 1)]
    P0 = PointSet([Point(0, (0, 0)), Point(1, (Q(1, 3), Q(1, 7)))])
    assert check_crossing_disk_lemma(two, P0, 1)
    assert check_crossing_disk_lemma(two, P0, 0)  # vacuous
    lines = random_lines(seed=3, count=10)
    P = generate("uniform", 5, seed=12)
    assert check_crossing_disk_lemma(lines, P, 3)
    with pytest.raises(ValueError):
        check_crossing_disk_lemma(two, P0, 2)  # needs 2r lines


def test_oracle_sandwich_small_instances():
    for seed in (1, 2, 3):
        P = generate("uniform", 6, seed=seed)
        R = canonical_ranges(P)
        t_star = min_feasible_t(R, "exact")
        t_opt = brute_force_opt_tree(R).t_opt
        tree, rep = build_tree(P, "randomized", seed=seed)
        assert t_star <= t_opt <= rep["total_crossing"]


def test_run_all_checks_block():
    block = run_all_checks(TRIANGLE, seed=0)
    assert block["duality_certificate"] is True
    assert block["separation_lower_bound"] is True
    assert block["oracle"]["t_opt"] == 2
    assert block["lp_threshold_le_t_opt"] is True
