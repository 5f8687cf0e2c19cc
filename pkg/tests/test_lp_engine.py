import numpy as np
import pytest
from scipy import sparse
from scipy.optimize import linprog

from crossing_forest import (
    Point,
    PointSet,
    Q,
    build_dual,
    build_min_t_lp,
    build_primal,
    build_separation,
    build_weighted_primal,
    canonical_ranges,
    edge_values,
    explicit_ranges,
    format_lp,
    min_feasible_t,
    solve,
)
import crossing_forest.lp_engine as lpe
from crossing_forest._simplex import solve_dense

TRIANGLE = PointSet([Point(0, (0, 0)), Point(1, (1, 0)), Point(2, (Q(1, 2), Q(7, 8)))])
SQUARE = PointSet(
    [Point(0, (0, 0)), Point(1, (1, 0)), Point(2, (1, 1)), Point(3, (0, 1))]
)
R_TRI = canonical_ranges(TRIANGLE)
R_SQ = canonical_ranges(SQUARE)


def scipy_optimum(lp):
    """Independent floating-point cross check of an LPInstance optimum."""
    c, A, b = lpe._float_parts(lp)
    res = linprog(c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    assert res.status == 0
    return -res.fun if lp.sense == "max" else res.fun


def test_primal_shape_n2():
    R = canonical_ranges(PointSet([Point(0, (0, 0)), Point(1, (1, 1))]))
    lp = build_primal(R, 1)
    assert lp.n_vars == 1
    rels = [(r.name, r.rel) for r in lp.rows]
    assert rels == [("range_0", "<="), ("cover_0", ">="), ("cover_1", ">=")]


def test_primal_triangle_opt():
    sol = solve(build_primal(R_TRI, 1))
    assert sol.status == "optimal"
    assert sol.objective == Q(3, 2)
    assert all(v == Q(1, 2) for v in edge_values(sol).values())
    assert abs(float(sol.objective) - scipy_optimum(build_primal(R_TRI, 1))) < 1e-7


def test_primal_triangle_infeasible_below_one():
    sol = solve(build_primal(R_TRI, Q(1, 2)))
    assert sol.status == "infeasible"


def test_primal_rejects_nonpositive_t():
    with pytest.raises(ValueError):
        build_primal(R_TRI, 0)


def test_weighted_n2():
    R = canonical_ranges(PointSet([Point(0, (0, 0)), Point(1, (3, 4))]))
    sol = solve(build_weighted_primal(R, 2))
    assert sol.status == "optimal"
    (val,) = edge_values(sol).values()
    assert val == 1  # cover forces >= 1, minimising lengths pins it there
    assert sol.objective == lpe.edge_lengths(R)[0]
    assert sol.objective == 5  # 3-4-5 edge has an exact 60-bit square root


def test_weighted_square_uses_sides_only():
    sol = solve(build_weighted_primal(R_SQ, 1))
    vals = edge_values(sol)
    sides = {(0, 1), (1, 2), (2, 3), (0, 3)}
    for pq, v in vals.items():
        assert v == (Q(1, 2) if pq in sides else 0)
    assert sol.objective == 2


def test_weighted_triangle_halves():
    # per-vertex rows pin each of the three edges at exactly 1/2
    sol = solve(build_weighted_primal(R_TRI, 1))
    assert all(v == Q(1, 2) for v in edge_values(sol).values())


def test_weighted_needs_coordinates():
    R = explicit_ranges(3, [[0], [1]])
    with pytest.raises(ValueError):
        build_weighted_primal(R, 1)


def test_dual_all_ones_feasible():
    lp = build_dual(R_SQ, 1)
    nl = len(R_SQ.ranges)
    z = [Q(1)] * nl + [Q(0)] * 4
    for row in lp.rows:
        tot = sum(z[int(j)] * a for j, a in zip(row.idx, row.coef))
        assert tot >= row.rhs  # every pair is separated by at least one range


def test_dual_n2_optimum():
    R = canonical_ranges(PointSet([Point(0, (0, 0)), Point(1, (1, 1))]))
    sol = solve(build_dual(R, 1))
    assert sol.status == "optimal" and sol.objective == 1


def test_strong_duality_triangle():
    p = solve(build_primal(R_TRI, 1))
    d = solve(build_dual(R_TRI, 1))
    assert p.objective == d.objective == Q(3, 2)


def test_weak_duality_any_feasible_dual_point():
    # all-ones dual point bounds gamma from above: gamma <= t*|ranges|
    for R, t in ((R_TRI, Q(1)), (R_SQ, Q(1))):
        p = solve(build_primal(R, t))
        assert p.objective <= t * len(R.ranges)


def test_separation_values():
    R = canonical_ranges(PointSet([Point(0, (0, 0)), Point(1, (1, 1))]))
    assert solve(build_separation(R)).objective == 1
    sq = solve(build_separation(R_SQ))
    # halfplane ranges admit no 3/2 fractional cover here: summing the four
    # side-pair constraints forces total mass 2, matched by two axis lines
    assert sq.objective == 2
    assert abs(float(sq.objective) - scipy_optimum(build_separation(R_SQ))) < 1e-7
    assert 4 * sq.objective * sq.objective >= 4  # sqrt(n)/2 bound


def test_solver_basics():
    res = solve_dense(1, [([0], [Q(1)], "<=", Q(2))], [Q(1)], "max")
    assert res.status == "optimal" and res.x[0] == 2
    res = solve_dense(
        1, [([0], [Q(1)], ">=", Q(2)), ([0], [Q(1)], "<=", Q(1))], [Q(1)], "max"
    )
    assert res.status == "infeasible"
    res = solve_dense(1, [([0], [Q(1)], ">=", Q(1))], [Q(1)], "max")
    assert res.status == "unbounded" and res.ray == [1]


def test_solve_unbounded_abstract():
    # pair {2,3} is separated by no range, so its edge variable is free to grow
    R = explicit_ranges(4, [[0], [1]])
    sol = solve(build_primal(R, 1))
    assert sol.status == "unbounded"


def test_min_feasible_t():
    R2 = canonical_ranges(PointSet([Point(0, (0, 0)), Point(1, (1, 1))]))
    assert min_feasible_t(R2, "exact") == 1
    assert min_feasible_t(R_TRI, "exact") == 1
    assert min_feasible_t(R_SQ, "exact") == 1
    assert min_feasible_t(R_SQ, "integer") == 1


def test_min_feasible_t_modes_agree():
    from crossing_forest.cli import generate

    for seed in (0, 1):
        P = generate("uniform", 7, seed=seed)
        R = canonical_ranges(P)
        exact = min_feasible_t(R, "exact")
        integer = min_feasible_t(R, "integer")
        assert exact <= integer
        assert integer - 1 < exact or integer == 1
        assert solve(build_primal(R, integer)).status == "optimal"


def test_solver_determinism():
    lpe.clear_cache()
    a = solve(build_primal(R_SQ, 1), use_cache=False)
    b = solve(build_primal(R_SQ, 1), use_cache=False)
    assert a.values == b.values and a.objective == b.objective
    assert a.duals == b.duals


def test_guided_path_matches_direct():
    # force the working-set path on a mid-size instance and compare
    from crossing_forest.cli import generate

    P = generate("uniform", 8, seed=3)
    R = canonical_ranges(P)
    lp = build_primal(R, 2)
    direct = lpe._package_dense(
        lp, solve_dense(lp.n_vars, lpe._dense_rows(lp), lp.objective, lp.sense)
    )
    guided = lpe._solve_guided(lp)
    assert direct.status == guided.status == "optimal"
    assert direct.objective == guided.objective


def test_min_t_lp_shape():
    lp = build_min_t_lp(R_TRI)
    assert lp.var_names[-1] == "t"
    assert lp.objective[-1] == 1 and all(o == 0 for o in lp.objective[:-1])


def test_format_lp_sections():
    text = format_lp(build_primal(R_TRI, Q(3, 2)))
    assert text.splitlines()[0] == "objective"
    assert "rows" in text.splitlines()
    assert "bounds" in text.splitlines()
    assert "range_0: " in text and "<= 3/2" in text
    assert "cover_2: " in text and ">= 1" in text
    assert "y_0_1 >= 0" in text


def test_length_precision_is_recorded():
    lp = build_weighted_primal(R_SQ, 1)
    assert lp.meta["length_precision_bits"] == 60
