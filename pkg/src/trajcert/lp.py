"""Dense two-phase primal simplex for small linear programs.

Every LP built by this package has a handful of variables and up to a few
thousand rows, so the solver keeps a condensed dictionary (one row per
constraint, one column per nonbasic variable) instead of a full tableau.
Slack, surplus and artificial variables exist only as row labels.

Phase 1 uses a single auxiliary variable shared by every infeasible
inequality row plus one artificial per equality row. Pricing is Dantzig's
largest coefficient; after 50 consecutive degenerate pivots the solver
switches to Bland's smallest-index rule until a pivot makes progress.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class Sense(str, enum.Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


class Relation(str, enum.Enum):
    LE = "<="
    EQ = "=="
    GE = ">="


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


PIVOT_TOL = 1e-9
FEAS_RTOL = 1e-7
BLAND_AFTER = 50


@dataclass
class LpProblem:
    """``sense  cost @ x  s.t.  A[i] @ x  rel[i]  b[i]``.

    Variables are free unless ``lower``/``upper`` say otherwise.
    """

    cost: np.ndarray
    sense: Sense = Sense.MINIMIZE
    A: np.ndarray = None
    rel: list = field(default_factory=list)
    b: np.ndarray = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float).ravel()
        self.sense = Sense(self.sense)
        V = self.cost.size
        self.A = np.zeros((0, V)) if self.A is None else np.asarray(self.A, dtype=float).reshape(-1, V)
        self.b = np.zeros(0) if self.b is None else np.asarray(self.b, dtype=float).ravel()
        self.rel = [Relation(r) for r in self.rel]
        if not (self.A.shape[0] == self.b.size == len(self.rel)):
            raise ValueError("row count mismatch between A, rel and b")
        for name in ("lower", "upper"):
            v = getattr(self, name)
            fill = -np.inf if name == "lower" else np.inf
            v = np.full(V, fill) if v is None else np.asarray(v, dtype=float).ravel().copy()
            if v.size != V:
                raise ValueError(f"{name} must have length {V}")
            setattr(self, name, v)
        if not (np.all(np.isfinite(self.cost)) and np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValueError("LP data must be finite")

    @property
    def num_vars(self) -> int:
        return self.cost.size

    @property
    def num_rows(self) -> int:
        return self.b.size

    def add_rows(self, A, rel, b) -> "LpProblem":
        """Append a block of rows sharing one relation."""
        A = np.asarray(A, dtype=float).reshape(-1, self.num_vars)
        b = np.broadcast_to(np.asarray(b, dtype=float), (A.shape[0],))
        self.A = np.vstack([self.A, A])
        self.b = np.concatenate([self.b, b])
        self.rel.extend([Relation(rel)] * A.shape[0])
        return self

    def add_row(self, coeffs, rel, rhs) -> "LpProblem":
        return self.add_rows(np.asarray(coeffs, dtype=float)[None, :], rel, [rhs])

    def row_violations(self, x) -> np.ndarray:
        """Signed violation per row (positive means violated)."""
        ax = self.A @ np.asarray(x, dtype=float)
        v = np.zeros(self.num_rows)
        rel = np.array([r.value for r in self.rel])
        v[rel == "<="] = (ax - self.b)[rel == "<="]
        v[rel == ">="] = (self.b - ax)[rel == ">="]
        v[rel == "=="] = np.abs(ax - self.b)[rel == "=="]
        return v

    def satisfied(self, x, rtol: float = FEAS_RTOL) -> bool:
        if np.any(np.asarray(x) < self.lower - rtol * (1 + np.abs(self.lower))):
            return False
        if np.any(np.asarray(x) > self.upper + rtol * (1 + np.abs(self.upper))):
            return False
        return bool(np.all(self.row_violations(x) <= rtol * (1 + np.abs(self.b))))


@dataclass
class LpSolution:
    status: Status
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    iterations: int = 0
    # phase-2 reduced costs of the nonbasic standard-form columns, minimize form
    reduced_costs: Optional[np.ndarray] = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _IterationLimit(Exception):
    pass


class _Dictionary:
    """``basic[i] = beta[i] + D[i] @ nonbasic``, objective ``z0 + c @ nonbasic`` (maximized)."""

    def __init__(self, D, beta, basic, nonbasic, budget):
        self.D = D
        self.beta = beta
        self.basic = basic
        self.nonbasic = nonbasic
        self.c = np.zeros(D.shape[1])
        self.z0 = 0.0
        self.iterations = 0
        self.budget = budget

    def pivot(self, r: int, s: int) -> None:
        if self.iterations >= self.budget:
            raise _IterationLimit
        self.iterations += 1
        D, beta = self.D, self.beta
        piv = D[r, s]
        row = -D[r] / piv
        row[s] = 1.0 / piv
        beta_r = -beta[r] / piv
        col = D[:, s].copy()
        col[r] = 0.0
        D[:, s] = 0.0
        D += np.outer(col, row)
        beta += col * beta_r
        D[r] = row
        beta[r] = beta_r
        cs = self.c[s]
        self.c[s] = 0.0
        self.c += cs * row
        self.z0 += cs * beta_r
        self.basic[r], self.nonbasic[s] = self.nonbasic[s], self.basic[r]

    def optimize(self, allowed: np.ndarray) -> bool:
        """Run simplex pivots; ``allowed`` masks columns that may enter.

        Returns False when the objective is unbounded.
        """
        degenerate = 0
        while True:
            cand = np.flatnonzero((self.c > PIVOT_TOL) & allowed)
            if cand.size == 0:
                return True
            bland = degenerate >= BLAND_AFTER
            if bland:
                s = cand[np.argmin(self.nonbasic[cand])]
            else:
                s = cand[np.argmax(self.c[cand])]
            col = self.D[:, s]
            rows = np.flatnonzero(col < -PIVOT_TOL)
            if rows.size == 0:
                return False
            ratios = np.maximum(self.beta[rows], 0.0) / -col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * (1.0 + best)]
            if bland:
                r = ties[np.argmin(self.basic[ties])]
            else:
                r = ties[np.argmax(np.abs(col[ties]))]
            degenerate = degenerate + 1 if best <= 1e-12 else 0
            self.pivot(r, s)
            np.maximum(self.beta, 0.0, out=self.beta, where=self.beta > -1e-13)

    def drop_row(self, r: int) -> None:
        keep = np.arange(self.D.shape[0]) != r
        self.D = self.D[keep]
        self.beta = self.beta[keep]
        self.basic = self.basic[keep]

    def drop_cols(self, mask: np.ndarray) -> None:
        keep = ~mask
        self.D = self.D[:, keep]
        self.c = self.c[keep]
        self.nonbasic = self.nonbasic[keep]


def _standard_form(prob: LpProblem):
    """Map ``x = offset + T y`` with ``y >= 0``; bounded variables add rows."""
    V = prob.num_vars
    cols, offset = [], np.zeros(V)
    extra_A, extra_b = [], []
    for j in range(V):
        lo, hi = prob.lower[j], prob.upper[j]
        e = np.zeros(V)
        e[j] = 1.0
        if np.isfinite(lo):
            offset[j] = lo
            cols.append(e)
            if np.isfinite(hi):
                extra_A.append(len(cols) - 1)
                extra_b.append(hi - lo)
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append(-e)
        else:
            cols.append(e)
            cols.append(-e)
    T = np.array(cols).T.reshape(V, len(cols))
    A = prob.A @ T
    b = prob.b - prob.A @ offset
    rel = list(prob.rel)
    if extra_A:
        E = np.zeros((len(extra_A), T.shape[1]))
        E[np.arange(len(extra_A)), extra_A] = 1.0
        A = np.vstack([A, E])
        b = np.concatenate([b, extra_b])
        rel += [Relation.LE] * len(extra_A)
    return T, offset, A, b, rel


def solve(prob: LpProblem, max_iterations: Optional[int] = None) -> LpSolution:
    """Two-phase primal simplex; see the module docstring for the pivoting rules.

    The pivot budget defaults to ``50 * (variables + rows)``.
    """
    T, offset, A, b, rel = _standard_form(prob)
    K = T.shape[1]
    cost = prob.cost @ T
    if prob.sense is Sense.MAXIMIZE:
        cost = -cost
    budget = 50 * (prob.num_vars + prob.num_rows) if max_iterations is None else max_iterations

    # equilibrate rows; all-zero rows are checked once and dropped
    scale = np.max(np.abs(A), axis=1, initial=0.0) if A.size else np.zeros(A.shape[0])
    feas_tol = FEAS_RTOL * (1.0 + np.abs(b))
    keep = scale > 0
    for i in np.flatnonzero(~keep):
        ok = {Relation.LE: b[i] >= -feas_tol[i], Relation.GE: b[i] <= feas_tol[i], Relation.EQ: abs(b[i]) <= feas_tol[i]}
        if not ok[rel[i]]:
            return LpSolution(Status.INFEASIBLE)
    A = A[keep] / scale[keep, None]
    b = b[keep] / scale[keep]
    rel = [r for r, k in zip(rel, keep) if k]
    m = b.size

    # basic_i = beta_i + D_i y
    sign = np.array([{Relation.LE: -1.0, Relation.GE: 1.0, Relation.EQ: -1.0}[r] for r in rel])
    is_eq = np.array([r is Relation.EQ for r in rel], dtype=bool)
    flip = is_eq & (b < 0)
    sign[flip] = 1.0
    D = sign[:, None] * A
    beta = -sign * b

    # labels: 0..K-1 structural, K..K+m-1 row variables, K+m auxiliary
    aux = K + m
    art_labels = K + np.flatnonzero(is_eq)
    need = (~is_eq) & (beta < 0)
    iterations = 0
    try:
        if need.any() or is_eq.any():
            D1 = np.hstack([D, (~is_eq).astype(float)[:, None]])
            dct = _Dictionary(D1, beta.copy(), K + np.arange(m), np.append(np.arange(K), aux), budget)
            # maximize -(aux + sum of equality artificials)
            dct.c = -D1[is_eq].sum(axis=0)
            dct.c[-1] = -1.0
            dct.z0 = -beta[is_eq].sum()
            if need.any():
                r = int(np.flatnonzero(need)[np.argmin(beta[need])])
                dct.pivot(r, K)
            dct.optimize(np.ones(K + 1, dtype=bool))
            iterations = dct.iterations
            if dct.z0 < -FEAS_RTOL * (1.0 + np.max(np.abs(b), initial=0.0)):
                return LpSolution(Status.INFEASIBLE, iterations=iterations)
            _expel_artificials(dct, aux, art_labels)
            dct.drop_cols(np.isin(dct.nonbasic, np.append(art_labels, aux)))
        else:
            dct = _Dictionary(D, beta.copy(), K + np.arange(m), np.arange(K), budget)

        # phase 2: maximize -cost @ y written over the current nonbasic set
        dct.c = np.zeros(dct.D.shape[1])
        dct.z0 = 0.0
        nb_struct = dct.nonbasic < K
        dct.c[nb_struct] = -cost[dct.nonbasic[nb_struct]]
        b_struct = np.flatnonzero(dct.basic < K)
        w = -cost[dct.basic[b_struct]]
        dct.c += w @ dct.D[b_struct]
        dct.z0 += w @ dct.beta[b_struct]
        bounded = dct.optimize(np.ones(dct.D.shape[1], dtype=bool))
        iterations = dct.iterations
    except _IterationLimit:
        return LpSolution(Status.ITERATION_LIMIT, iterations=budget)

    if not bounded:
        return LpSolution(Status.UNBOUNDED, iterations=iterations)
    y = np.zeros(K)
    b_struct = dct.basic < K
    y[dct.basic[b_struct]] = dct.beta[b_struct]
    x = offset + T @ y
    return LpSolution(
        Status.OPTIMAL,
        x=x,
        objective=float(prob.cost @ x),
        iterations=iterations,
        reduced_costs=-dct.c.copy(),
    )


def _expel_artificials(dct: _Dictionary, aux: int, art_labels: np.ndarray) -> None:
    """Pivot the auxiliary and equality artificials out of the basis (all at zero level)."""
    banned = np.append(art_labels, aux)
    r = 0
    while r < dct.D.shape[0]:
        if dct.basic[r] in banned:
            ok = ~np.isin(dct.nonbasic, banned) & (np.abs(dct.D[r]) > PIVOT_TOL)
            if ok.any():
                s = int(np.flatnonzero(ok)[np.argmax(np.abs(dct.D[r])[ok])])
                dct.pivot(r, s)
            else:
                # redundant row: the artificial cannot move
                dct.drop_row(r)
                continue
        r += 1
