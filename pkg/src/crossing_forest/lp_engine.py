"""The four linear programs and the exact solver behind them.

Builders produce immutable LPInstance values over named variables; solve()
returns exact rational solutions.  Large instances are handled by working-set
generation: a floating-point solve (HiGHS) proposes which rows and columns
matter, then the embedded exact simplex (:mod:`._simplex`) solves the reduced
problem and every verdict is certified against the full instance with exact
arithmetic (feasibility of the point, sign-correct duals, reduced costs over
all columns, objective equality).  Floating point never decides anything.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from ._simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, DenseResult, solve_dense
from .range_space import RangeSpace
from .rationals import Q, q_str, sqrt_floor_bits

LENGTH_PRECISION_BITS = 60

_ONE = Q(1)
_ZERO = Q(0)


class LPRow:
    """One constraint: sparse coefficients, relation, right-hand side."""

    __slots__ = ("name", "idx", "coef", "rel", "rhs")

    def __init__(self, name, idx, coef, rel, rhs):
        self.name = name
        self.idx = np.asarray(idx, dtype=np.int64)
        self.coef = np.asarray(coef, dtype=object)
        self.rel = rel
        self.rhs = rhs


@dataclass
class LPInstance:
    """Standard-form LP: sense, named nonnegative variables, <=/>= rows."""

    sense: str
    var_names: tuple
    objective: tuple
    rows: tuple
    meta: dict = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    def cache_key(self):
        return self.meta.get("cache")


@dataclass
class FractionalSolution:
    """Exact solution values keyed by variable name, plus row duals."""

    status: str
    values: dict
    objective: object
    lp: LPInstance
    duals: dict | None = None

    def value(self, name):
        return self.values[name]


def edge_var(i: int, j: int) -> str:
    a, b = (i, j) if i < j else (j, i)
    return f"y_{a}_{b}"


def edge_values(sol: FractionalSolution) -> dict:
    """Pair -> value mapping for primal/weighted solutions."""
    pairs = sol.lp.meta["pairs"]
    return {pq: sol.values[edge_var(*pq)] for pq in pairs}


def _incident_pair_indices(pairs, n):
    inc = [[] for _ in range(n)]
    for k, (i, j) in enumerate(pairs):
        inc[i].append(k)
        inc[j].append(k)
    return inc


def _range_rows(R: RangeSpace, t, t_col=None):
    pairs, X = R.pair_crossing_matrix()
    rows = []
    for k in range(len(R.ranges)):
        idx = np.flatnonzero(X[k])
        if t_col is None:
            rows.append(LPRow(f"range_{k}", idx, [_ONE] * len(idx), "<=", t))
        else:
            rows.append(
                LPRow(
                    f"range_{k}",
                    list(idx) + [t_col],
                    [_ONE] * len(idx) + [Q(-1)],
                    "<=",
                    _ZERO,
                )
            )
    return pairs, rows


def _cover_rows(pairs, n):
    inc = _incident_pair_indices(pairs, n)
    return [
        LPRow(f"cover_{p}", inc[p], [_ONE] * len(inc[p]), ">=", _ONE)
        for p in range(n)
    ]


def build_primal(R: RangeSpace, t) -> LPInstance:
    """max sum(y) s.t. each range crossed at most t, each point covered."""
    n = R.ground_size
    if n < 2:
        raise ValueError("need at least 2 ground elements")
    t = t if isinstance(t, type(_ONE)) else Q(t)
    if t <= 0:
        raise ValueError("t must be positive")
    pairs, rows = _range_rows(R, t)
    rows += _cover_rows(pairs, n)
    names = tuple(edge_var(i, j) for i, j in pairs)
    meta = {
        "kind": "primal",
        "t": t,
        "pairs": pairs,
        "rs": R.fingerprint(),
        "cache": f"primal|{R.fingerprint()}|{t}",
    }
    return LPInstance("max", names, (_ONE,) * len(pairs), tuple(rows), meta)


def _feasibility_probe_lp(R: RangeSpace, t) -> LPInstance:
    lp = build_primal(R, t)
    meta = dict(lp.meta)
    meta["kind"] = "feasibility"
    meta["cache"] = f"feas|{R.fingerprint()}|{meta['t']}"
    return LPInstance("max", lp.var_names, (_ZERO,) * lp.n_vars, lp.rows, meta)


def edge_lengths(R: RangeSpace):
    """Fixed 60-bit rational approximations of Euclidean edge lengths."""
    if R.points is None:
        raise ValueError("abstract set system has no coordinates")
    if R._edge_lengths is None:
        pairs, _ = R.pair_crossing_matrix()
        mat = R.points.coord_matrix()
        lens = []
        for i, j in pairs:
            d2 = sum((mat[i, k] - mat[j, k]) ** 2 for k in range(R.points.dimension))
            lens.append(sqrt_floor_bits(d2, LENGTH_PRECISION_BITS))
        R._edge_lengths = tuple(lens)
    return R._edge_lengths


def build_weighted_primal(R: RangeSpace, t) -> LPInstance:
    """Same feasible region as build_primal, objective min sum(|pq| x_pq)."""
    n = R.ground_size
    if n < 2:
        raise ValueError("need at least 2 ground elements")
    t = t if isinstance(t, type(_ONE)) else Q(t)
    if t <= 0:
        raise ValueError("t must be positive")
    lens = edge_lengths(R)
    pairs, rows = _range_rows(R, t)
    rows += _cover_rows(pairs, n)
    names = tuple(edge_var(i, j) for i, j in pairs)
    meta = {
        "kind": "weighted",
        "t": t,
        "pairs": pairs,
        "rs": R.fingerprint(),
        "length_precision_bits": LENGTH_PRECISION_BITS,
        "cache": f"weighted|{R.fingerprint()}|{t}",
    }
    return LPInstance("min", names, tuple(lens), tuple(rows), meta)


def build_dual(R: RangeSpace, t) -> LPInstance:
    """min t*sum(z_range) - sum(z_point) s.t. every pair is separated."""
    n = R.ground_size
    if n < 2:
        raise ValueError("need at least 2 ground elements")
    t = t if isinstance(t, type(_ONE)) else Q(t)
    pairs, X = R.pair_crossing_matrix()
    nl = len(R.ranges)
    names = tuple(f"zl_{k}" for k in range(nl)) + tuple(f"zp_{p}" for p in range(n))
    objective = (t,) * nl + (Q(-1),) * n
    rows = []
    for pidx, (i, j) in enumerate(pairs):
        crossing = np.flatnonzero(X[:, pidx]) if nl else np.empty(0, dtype=np.int64)
        idx = list(crossing) + [nl + i, nl + j]
        coef = [_ONE] * len(crossing) + [Q(-1), Q(-1)]
        rows.append(LPRow(f"pair_{i}_{j}", idx, coef, ">=", _ONE))
    meta = {
        "kind": "dual",
        "t": t,
        "pairs": pairs,
        "rs": R.fingerprint(),
        "cache": f"dual|{R.fingerprint()}|{t}",
    }
    return LPInstance("min", names, objective, tuple(rows), meta)


def build_separation(R: RangeSpace) -> LPInstance:
    """min sum(z_range) s.t. every pair separated with total weight >= 1."""
    n = R.ground_size
    if n < 2:
        raise ValueError("need at least 2 ground elements")
    pairs, X = R.pair_crossing_matrix()
    nl = len(R.ranges)
    names = tuple(f"zl_{k}" for k in range(nl))
    rows = []
    for pidx, (i, j) in enumerate(pairs):
        crossing = np.flatnonzero(X[:, pidx]) if nl else np.empty(0, dtype=np.int64)
        rows.append(
            LPRow(f"pair_{i}_{j}", crossing, [_ONE] * len(crossing), ">=", _ONE)
        )
    meta = {
        "kind": "separation",
        "pairs": pairs,
        "rs": R.fingerprint(),
        "cache": f"sep|{R.fingerprint()}",
    }
    return LPInstance("min", names, (_ONE,) * nl, tuple(rows), meta)


def build_min_t_lp(R: RangeSpace) -> LPInstance:
    """Feasibility threshold as an LP: min t with t a decision variable."""
    n = R.ground_size
    if n < 2:
        raise ValueError("need at least 2 ground elements")
    pairs, rows = _range_rows(R, None, t_col=len(R.pair_list()))
    rows += _cover_rows(pairs, n)
    names = tuple(edge_var(i, j) for i, j in pairs) + ("t",)
    objective = (_ZERO,) * len(pairs) + (_ONE,)
    meta = {
        "kind": "min_t",
        "pairs": pairs,
        "rs": R.fingerprint(),
        "cache": f"mint|{R.fingerprint()}",
    }
    return LPInstance("min", names, objective, tuple(rows), meta)


# ---------------------------------------------------------------------------
# solving


_DIRECT_CELL_LIMIT = 25000
_ROW_ADD_CAP = 200
_COL_ADD_CAP = 300
_FLOAT_TIGHT = 1e-7
_FLOAT_DUAL = 1e-9

_CACHE: dict = {}


def clear_cache():
    _CACHE.clear()


def solve(lp: LPInstance, use_cache: bool = True) -> FractionalSolution:
    """Exact optimum / infeasible / unbounded verdict for an LPInstance.

    Identical instances yield identical basic solutions (Bland's rule plus a
    deterministic working-set schedule).
    """
    key = lp.cache_key()
    if use_cache and key is not None and key in _CACHE:
        return _CACHE[key]
    n, m = lp.n_vars, len(lp.rows)
    if n * max(m, 1) <= _DIRECT_CELL_LIMIT:
        sol = _package_dense(lp, solve_dense(n, _dense_rows(lp), lp.objective, lp.sense))
        if sol.status == OPTIMAL:
            _assert_certificate(lp, sol)
    else:
        sol = _solve_guided(lp)
    if use_cache and key is not None:
        _CACHE[key] = sol
    return sol


def _dense_rows(lp: LPInstance):
    return [(r.idx, r.coef, r.rel, r.rhs) for r in lp.rows]


def _package_dense(lp: LPInstance, res: DenseResult) -> FractionalSolution:
    if res.status == INFEASIBLE:
        return FractionalSolution(INFEASIBLE, {}, None, lp)
    if res.status == UNBOUNDED:
        return FractionalSolution(UNBOUNDED, {}, None, lp)
    values = {name: res.x[j] for j, name in enumerate(lp.var_names)}
    duals = {row.name: res.duals[i] for i, row in enumerate(lp.rows)}
    return FractionalSolution(OPTIMAL, values, res.objective, lp, duals)


def _float_parts(lp: LPInstance):
    data, rr, cc, b = [], [], [], []
    for i, row in enumerate(lp.rows):
        sgn = 1.0 if row.rel == "<=" else -1.0
        for j, a in zip(row.idx, row.coef):
            data.append(sgn * float(a))
            rr.append(i)
            cc.append(int(j))
        b.append(sgn * float(row.rhs))
    A = sparse.csr_matrix(
        (data, (rr, cc)), shape=(len(lp.rows), lp.n_vars), dtype=np.float64
    )
    c = np.array(
        [(-float(o) if lp.sense == "max" else float(o)) for o in lp.objective]
    )
    return c, A, np.array(b)


def _row_value(row: LPRow, support_keys: np.ndarray, xs: dict):
    if len(row.idx) == 0 or len(support_keys) == 0:
        return _ZERO
    mask = np.isin(row.idx, support_keys, assume_unique=False)
    if not mask.any():
        return _ZERO
    tot = _ZERO
    for j, a in zip(row.idx[mask], row.coef[mask]):
        tot = tot + a * xs[int(j)]
    return tot


def _violated_rows(lp: LPInstance, xs: dict, skip: set):
    support_keys = np.fromiter(xs.keys(), dtype=np.int64, count=len(xs))
    out = []
    for i, row in enumerate(lp.rows):
        if i in skip:
            continue
        v = _row_value(row, support_keys, xs)
        if row.rel == "<=":
            if v > row.rhs:
                out.append((v - row.rhs, i))
        else:
            if v < row.rhs:
                out.append((row.rhs - v, i))
    out.sort(key=lambda p: (-p[0], p[1]))
    return [i for _, i in out]


def _reduced_costs(lp: LPInstance, y: dict):
    z = np.array([Q(o) for o in lp.objective], dtype=object)
    for i, yi in y.items():
        if yi == 0:
            continue
        row = lp.rows[i]
        if len(row.idx):
            z[row.idx] = z[row.idx] - yi * row.coef
    return z


def _assert_certificate(lp: LPInstance, sol: FractionalSolution):
    """Exact optimality certificate: feasible point, sign-correct duals,
    reduced costs of the right sign everywhere, objective equality."""
    xs = {
        j: sol.values[name]
        for j, name in enumerate(lp.var_names)
        if sol.values[name] != 0
    }
    if _violated_rows(lp, xs, skip=set()):
        raise RuntimeError("certificate failure: primal infeasibility")
    y = {i: sol.duals[row.name] for i, row in enumerate(lp.rows)}
    for i, row in enumerate(lp.rows):
        yi = y[i]
        good = yi >= 0 if (row.rel == "<=") == (lp.sense == "max") else yi <= 0
        if not good:
            raise RuntimeError("certificate failure: dual sign")
    z = _reduced_costs(lp, y)
    for j in range(lp.n_vars):
        if (lp.sense == "max" and z[j] > 0) or (lp.sense == "min" and z[j] < 0):
            raise RuntimeError("certificate failure: reduced cost sign")
        if xs.get(j, _ZERO) != 0 and z[j] != 0:
            raise RuntimeError("certificate failure: complementary slackness")
    lhs = sum(Q(o) * xs.get(j, _ZERO) for j, o in enumerate(lp.objective))
    rhs = sum(y[i] * Q(row.rhs) for i, row in enumerate(lp.rows))
    if lhs != sol.objective or rhs != sol.objective:
        raise RuntimeError("certificate failure: objective mismatch")


def _sub_lp(lp: LPInstance, cols: list, rows_idx: list):
    pos = {j: k for k, j in enumerate(cols)}
    sub_rows = []
    for i in rows_idx:
        row = lp.rows[i]
        if len(row.idx):
            mask = np.isin(row.idx, np.asarray(cols, dtype=np.int64))
            idx = [pos[int(j)] for j in row.idx[mask]]
            coef = list(row.coef[mask])
        else:
            idx, coef = [], []
        sub_rows.append((idx, coef, row.rel, row.rhs))
    objective = [lp.objective[j] for j in cols]
    return sub_rows, objective


def _solve_guided(lp: LPInstance) -> FractionalSolution:
    c, A, b = _float_parts(lp)
    res = linprog(c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    cols: set = set()
    rows: set = set()
    if res.status == 2:
        verdict = _exact_infeasible(lp, rows, cols)
        if verdict is not None:
            return verdict
    elif res.status == 0:
        xs = res.x
        duals = res.ineqlin.marginals
        slack = res.slack
        cols = {int(j) for j in np.flatnonzero(xs > _FLOAT_DUAL)}
        # columns with near-zero float reduced cost are alternate-optimum
        # candidates the exact solve may need; pulling them in now avoids
        # one-column-per-round crawling later
        zf = c - A.T.dot(duals)
        near = np.flatnonzero(np.abs(zf) < 1e-6)
        if len(near) <= len(cols) + 500:
            cols.update(int(j) for j in near)
        else:
            order = np.argsort(np.abs(zf[near]), kind="stable")
            cols.update(int(near[j]) for j in order[: len(cols) + 500])
        # tight rows almost always contain the exact optimal active set, so
        # one exact solve usually settles it; extra rows only trickle in
        # through the generation loop on near-degenerate instances
        rows = {
            int(i)
            for i in np.flatnonzero(
                (slack < _FLOAT_TIGHT) | (np.abs(duals) > _FLOAT_DUAL)
            )
        }
        if len(rows) > 1200:
            ranked = sorted(rows, key=lambda i: (-abs(float(duals[i])), i))
            rows = set(ranked[:1200])
    else:
        # no usable float guidance; fall back to the full exact solve
        sol = _package_dense(
            lp, solve_dense(lp.n_vars, _dense_rows(lp), lp.objective, lp.sense)
        )
        if sol.status == OPTIMAL:
            _assert_certificate(lp, sol)
        return sol
    return _generation_loop(lp, cols, rows)


def _exact_infeasible(lp: LPInstance, rows: set, cols: set):
    """Certify infeasibility via exact phase 1 on a growing row subset.

    Returns an INFEASIBLE solution, or None (meaning the float verdict was
    wrong and the caller should run the optimality loop with the seeds
    accumulated in `rows`/`cols`).
    """
    for i, row in enumerate(lp.rows):
        if row.rel == ">=":
            rows.add(i)
    while True:
        cols.update(int(j) for i in rows for j in lp.rows[i].idx)
        cl, rl = sorted(cols), sorted(rows)
        sub_rows, _ = _sub_lp(lp, cl, rl)
        res = solve_dense(len(cl), sub_rows, [_ZERO] * len(cl), "min")
        if res.status == INFEASIBLE:
            return FractionalSolution(INFEASIBLE, {}, None, lp)
        xs = {cl[k]: v for k, v in enumerate(res.x) if v != 0}
        viol = _violated_rows(lp, xs, skip=set(rl))
        if not viol:
            return None
        rows.update(viol[:_ROW_ADD_CAP])


def _generation_loop(lp: LPInstance, cols: set, rows: set) -> FractionalSolution:
    limit = 2 * (len(lp.rows) + lp.n_vars) + 100
    for _ in range(limit):
        cl, rl = sorted(cols), sorted(rows)
        sub_rows, sub_obj = _sub_lp(lp, cl, rl)
        res = solve_dense(len(cl), sub_rows, sub_obj, lp.sense)
        if res.status == INFEASIBLE:
            all_cols = {int(j) for i in rl for j in lp.rows[i].idx}
            if not all_cols <= cols:
                cols |= all_cols
                continue
            return FractionalSolution(INFEASIBLE, {}, None, lp)
        if res.status == UNBOUNDED:
            ray = {cl[k]: v for k, v in enumerate(res.ray) if v != 0}
            blocked = _ray_blocking_rows(lp, ray, set(rl))
            if blocked:
                rows.update(blocked[:_ROW_ADD_CAP])
                continue
            feas = solve_dense(len(cl), sub_rows, [_ZERO] * len(cl), "min")
            xs = {cl[k]: v for k, v in enumerate(feas.x) if v != 0}
            viol = _violated_rows(lp, xs, skip=set(rl))
            if viol:
                rows.update(viol[:_ROW_ADD_CAP])
                continue
            return FractionalSolution(UNBOUNDED, {}, None, lp)
        xs = {cl[k]: v for k, v in enumerate(res.x) if v != 0}
        viol = _violated_rows(lp, xs, skip=set(rl))
        if viol:
            rows.update(viol[:_ROW_ADD_CAP])
            continue
        y = {i: res.duals[k] for k, i in enumerate(rl)}
        z = _reduced_costs(lp, y)
        if lp.sense == "max":
            bad = [(z[j], j) for j in range(lp.n_vars) if z[j] > 0]
            bad.sort(key=lambda p: (-p[0], p[1]))
        else:
            bad = [(z[j], j) for j in range(lp.n_vars) if z[j] < 0]
            bad.sort(key=lambda p: (p[0], p[1]))
        bad_idx = [j for _, j in bad]
        if any(j in cols for j in bad_idx):
            raise RuntimeError("internal: reduced cost violated inside working set")
        if bad_idx:
            cols.update(bad_idx[:_COL_ADD_CAP])
            continue
        values = {name: _ZERO for name in lp.var_names}
        for j, v in xs.items():
            values[lp.var_names[j]] = v
        duals = {row.name: _ZERO for row in lp.rows}
        for i, yi in y.items():
            duals[lp.rows[i].name] = yi
        sol = FractionalSolution(OPTIMAL, values, res.objective, lp, duals)
        _assert_certificate(lp, sol)
        return sol
    raise RuntimeError("working-set generation failed to converge")


def _ray_blocking_rows(lp: LPInstance, ray: dict, skip: set):
    support_keys = np.fromiter(ray.keys(), dtype=np.int64, count=len(ray))
    out = []
    for i, row in enumerate(lp.rows):
        if i in skip:
            continue
        v = _row_value(row, support_keys, ray)
        if (row.rel == "<=" and v > 0) or (row.rel == ">=" and v < 0):
            out.append(i)
    return out


def primal_feasible(R: RangeSpace, t) -> bool:
    """Exact feasibility verdict for the edge LP at parameter t.

    Same feasible region as build_primal(R, t); solved with a zero objective
    so only the exact phase-1 answer is paid for.
    """
    return solve(_feasibility_probe_lp(R, t)).status == OPTIMAL


def min_feasible_t(R: RangeSpace, granularity: str = "exact"):
    """Least t making the edge LP feasible.

    exact: true fractional threshold (t as an LP variable).  integer: least
    integer t in [1, n]; t = n is always feasible since a spanning star is.
    """
    if R.ground_size < 2:
        raise ValueError("need at least 2 ground elements")
    if granularity == "exact":
        sol = solve(build_min_t_lp(R))
        if sol.status != OPTIMAL:
            raise RuntimeError(f"threshold LP unexpectedly {sol.status}")
        return sol.objective
    if granularity != "integer":
        raise ValueError("granularity must be 'exact' or 'integer'")
    n = R.ground_size
    probed = {}

    def feasible(t: int) -> bool:
        if t not in probed:
            probed[t] = solve(_feasibility_probe_lp(R, Q(t))).status == OPTIMAL
        return probed[t]

    lo, hi = 1, n
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid + 1
    if not feasible(lo):
        raise RuntimeError("no feasible t in [1, n]; spanning star bound broken")
    return lo


def format_lp(lp: LPInstance) -> str:
    """Sectioned plain text (objective / rows / bounds), rationals as p/q."""

    def term(a, name):
        return name if a == 1 else f"{q_str(a)} {name}"

    lines = ["objective"]
    terms = [
        term(a, lp.var_names[j]) for j, a in enumerate(lp.objective) if a != 0
    ]
    lines.append(f"  {lp.sense}: " + (" + ".join(terms) if terms else "0"))
    lines.append("rows")
    for row in lp.rows:
        body = " + ".join(
            term(a, lp.var_names[int(j)]) for j, a in zip(row.idx, row.coef)
        )
        lines.append(f"  {row.name}: {body if body else '0'} {row.rel} {q_str(row.rhs)}")
    lines.append("bounds")
    for name in lp.var_names:
        lines.append(f"  {name} >= 0")
    return "\n".join(lines) + "\n"
