"""Dense exact-rational tableau simplex.

Two-phase method over exact rationals with Bland's anti-cycling rule, so
termination is guaranteed and every verdict (optimal / infeasible /
unbounded) is exact.  This is the decision authority behind
``lp_engine.solve``; floating point never influences a result, only which
sub-LP gets handed to this solver first.

Internal canonical form: minimise c.x subject to rows (<= / >=), x >= 0.
Duals are reported in the caller's orientation: for a maximisation problem
y >= 0 on <= rows and y <= 0 on >= rows, and symmetrically for min.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rationals import Q

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_MAX_PIVOTS_BASE = 20000


@dataclass
class DenseResult:
    status: str
    x: list | None = None
    objective: object | None = None
    duals: list | None = None  # one per input row, caller orientation
    ray: list | None = None  # structural ray direction when unbounded


def solve_dense(num_vars: int, rows, objective, sense: str) -> DenseResult:
    """Solve min/max objective.x s.t. rows, x >= 0 exactly.

    rows: iterable of (indices, coefficients, relation, rhs) with relation
    "<=" or ">=".  Deterministic for identical input.
    """
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    rows = list(rows)
    m = len(rows)
    nv = num_vars

    c_int = [Q(o) if sense == "min" else -Q(o) for o in objective]
    if len(c_int) != nv:
        raise ValueError("objective length mismatch")

    # normalise to <=, then to equalities with nonnegative right-hand side
    rels = []
    stored = []  # (dense struct coeffs, slack sign, rhs)
    need_art = []
    for idx, coef, rel, rhs in rows:
        if rel not in ("<=", ">="):
            raise ValueError(f"unsupported relation {rel!r}")
        rels.append(rel)
        sgn = 1 if rel == "<=" else -1
        dense = [Q(0)] * nv
        for j, a in zip(idx, coef):
            dense[j] = dense[j] + (a if sgn == 1 else -a)
        b = Q(rhs) if sgn == 1 else -Q(rhs)
        slack_sign = 1
        if b < 0:
            dense = [-a for a in dense]
            b = -b
            slack_sign = -1
        stored.append((dense, slack_sign, b))
        need_art.append(slack_sign < 0)

    n_art = sum(need_art)
    width = nv + m + n_art + 1
    T = np.zeros((m, width), dtype=object)
    basis = [0] * m
    next_art = nv + m
    for i, (dense, slack_sign, b) in enumerate(stored):
        for j, a in enumerate(dense):
            if a != 0:
                T[i, j] = a
        T[i, nv + i] = Q(slack_sign)
        T[i, -1] = b
        if need_art[i]:
            T[i, next_art] = Q(1)
            basis[i] = next_art
            next_art += 1
        else:
            basis[i] = nv + i

    z2 = np.zeros(width, dtype=object)
    for j, cj in enumerate(c_int):
        if cj != 0:
            z2[j] = cj

    allowed_end = nv + m  # artificials may never (re-)enter

    def pivot(pr: int, pc: int, z_rows):
        piv = T[pr, pc]
        if piv != 1:
            T[pr] = T[pr] / piv
        row = T[pr]
        cols_nz = np.flatnonzero(row != 0)
        col = T[:, pc]
        mask = col != 0
        mask[pr] = False
        if mask.any():
            # zeros in the pivot row stay zeros; touch only its support
            T[np.ix_(mask, cols_nz)] -= np.outer(col[mask].copy(), row[cols_nz])
        for z in z_rows:
            f = z[pc]
            if f != 0:
                z[cols_nz] = z[cols_nz] - f * row[cols_nz]
        basis[pr] = pc

    _STALL_LIMIT = 40

    def run_phase(z, z_rows, max_pivots):
        # Dantzig's rule while the objective moves, Bland's rule as the
        # anti-cycling guarantee once pivots degenerate
        pivots = 0
        stalled = 0
        bland = False
        while True:
            enter = -1
            if bland:
                for j in range(allowed_end):
                    if z[j] < 0:
                        enter = j
                        break
            else:
                best_z = 0
                for j in range(allowed_end):
                    zj = z[j]
                    if zj < best_z:
                        best_z = zj
                        enter = j
            if enter < 0:
                return OPTIMAL, -1
            best = None
            leave = -1
            for r in range(T.shape[0]):
                a = T[r, enter]
                if a > 0:
                    ratio = T[r, -1] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and basis[r] < basis[leave])
                    ):
                        best = ratio
                        leave = r
            if leave < 0:
                return UNBOUNDED, enter
            pivot(leave, enter, z_rows)
            pivots += 1
            if not bland:
                if best == 0:
                    stalled += 1
                    if stalled >= _STALL_LIMIT:
                        bland = True
                else:
                    stalled = 0
            if pivots > max_pivots:
                raise RuntimeError("pivot budget exhausted (cycling?)")

    max_pivots = _MAX_PIVOTS_BASE + 200 * (m + nv)
    deleted = [False] * m

    if n_art:
        z1 = np.zeros(width, dtype=object)
        for col in range(nv + m, width - 1):
            z1[col] = Q(1)
        for i in range(m):
            if need_art[i]:
                z1 -= T[i]
        status, _ = run_phase(z1, [z1, z2], max_pivots)
        if status != OPTIMAL:
            raise RuntimeError("phase 1 cannot be unbounded")
        if -z1[-1] != 0:
            return DenseResult(status=INFEASIBLE)
        # drive basic artificials out; rows that resist are redundant.
        # tableau rows still align with input rows here (nothing deleted).
        drop = set()
        for r in range(T.shape[0]):
            if basis[r] >= nv + m:
                pc = -1
                for j in range(allowed_end):
                    if T[r, j] != 0:
                        pc = j
                        break
                if pc >= 0:
                    pivot(r, pc, [z2])
                else:
                    drop.add(r)
        if drop:
            for r in drop:
                deleted[r] = True
            keep = [r for r in range(T.shape[0]) if r not in drop]
            T = T[keep]
            basis = [basis[r] for r in keep]

    status, enter = run_phase(z2, [z2], max_pivots)

    if status == UNBOUNDED:
        ray = [Q(0)] * nv
        if enter < nv:
            ray[enter] = Q(1)
        for r in range(T.shape[0]):
            if basis[r] < nv:
                ray[basis[r]] = -T[r, enter]
        return DenseResult(status=UNBOUNDED, ray=ray)

    x = [Q(0)] * nv
    for r in range(T.shape[0]):
        if basis[r] < nv:
            x[basis[r]] = T[r, -1]
    val = -z2[-1]
    obj_user = val if sense == "min" else -val

    duals = []
    for i in range(m):
        y = Q(0) if deleted[i] else -z2[nv + i]
        if rels[i] == ">=":
            y = -y
        if sense == "max":
            y = -y
        duals.append(Q(y))
    return DenseResult(status=OPTIMAL, x=x, objective=Q(obj_user), duals=duals)
