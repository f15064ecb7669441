"""Linear programs: a small builder, a bounded-variable primal simplex and a
HiGHS backend behind the same ``solve`` call.

The simplex works on a dense tableau and uses Bland's rule for both the
entering and the leaving variable, so it is deterministic and cannot cycle.
It is meant for small and medium problems; the mitigation policies default
to the HiGHS backend shipped with SciPy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

INF = math.inf

_RELATIONS = {"<=": "<=", "le": "<=", "=": "==", "==": "==", "eq": "==", ">=": ">=", "ge": ">="}


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    FAILED = "failed"


class LpSolverError(RuntimeError):
    """Numerical breakdown inside a solver (never reported as Optimal)."""


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float = math.nan
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class LinearProgram:
    """minimize c.x + const  s.t.  rows (<=, ==, >=) rhs,  lb <= x <= ub."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.cost: list[float] = []
        self.var_names: list[str] = []
        self.objective_constant = 0.0
        self._row_idx: list[np.ndarray] = []
        self._row_val: list[np.ndarray] = []
        self.relations: list[str] = []
        self.rhs: list[float] = []

    @property
    def n_vars(self) -> int:
        return len(self.lb)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    def add_variable(self, lb: float = 0.0, ub: float = INF, cost: float = 0.0, name: str | None = None) -> int:
        if lb > ub:
            raise ValueError(f"variable bounds out of order: {lb} > {ub}")
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.cost.append(float(cost))
        self.var_names.append(name or f"x{len(self.lb) - 1}")
        return len(self.lb) - 1

    def add_variables(self, n: int, lb=0.0, ub=INF, cost=0.0, prefix: str = "x") -> np.ndarray:
        lb = np.broadcast_to(np.asarray(lb, dtype=float), (n,))
        ub = np.broadcast_to(np.asarray(ub, dtype=float), (n,))
        cost = np.broadcast_to(np.asarray(cost, dtype=float), (n,))
        start = self.n_vars
        for k in range(n):
            self.add_variable(lb[k], ub[k], cost[k], f"{prefix}{k}")
        return np.arange(start, start + n)

    def add_constraint(self, coeffs: Mapping[int, float] | tuple[Sequence[int], Sequence[float]],
                       relation: str, rhs: float) -> int:
        if isinstance(coeffs, Mapping):
            idx = np.fromiter(coeffs.keys(), dtype=np.int64, count=len(coeffs))
            val = np.fromiter(coeffs.values(), dtype=float, count=len(coeffs))
        else:
            idx = np.asarray(coeffs[0], dtype=np.int64)
            val = np.asarray(coeffs[1], dtype=float)
        if len(idx) and (idx.min() < 0 or idx.max() >= self.n_vars):
            raise ValueError("constraint references an undeclared variable")
        if relation not in _RELATIONS:
            raise ValueError(f"unknown relation {relation!r}")
        self._row_idx.append(idx)
        self._row_val.append(val)
        self.relations.append(_RELATIONS[relation])
        self.rhs.append(float(rhs))
        return self.n_rows - 1

    def matrix(self) -> sp.csr_matrix:
        if not self._row_idx:
            return sp.csr_matrix((0, self.n_vars))
        rows = np.concatenate([np.full(len(i), r) for r, i in enumerate(self._row_idx)])
        cols = np.concatenate(self._row_idx)
        vals = np.concatenate(self._row_val)
        # duplicate (row, col) entries are summed
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n_rows, self.n_vars))

    def evaluate(self, x: np.ndarray) -> float:
        return float(np.dot(self.cost, x) + self.objective_constant)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest bound or row violation at ``x``, rows scaled to unit max-norm."""
        x = np.asarray(x, dtype=float)
        viol = 0.0
        if self.n_vars:
            viol = max(float(np.max(np.asarray(self.lb) - x, initial=0)),
                       float(np.max(x - np.asarray(self.ub), initial=0)))
        a = self.matrix()
        ax = a @ x
        scale = abs(a).max(axis=1).toarray().ravel() if self.n_rows else np.zeros(0)
        scale[scale == 0] = 1.0
        for r, rel in enumerate(self.relations):
            diff = (ax[r] - self.rhs[r]) / scale[r]
            if rel == "<=":
                viol = max(viol, diff)
            elif rel == ">=":
                viol = max(viol, -diff)
            else:
                viol = max(viol, abs(diff))
        return viol

    def to_lp_text(self) -> str:
        """CPLEX LP format, readable by glpsol, HiGHS, CBC and friends."""

        def term_list(idx, val):
            parts = [f"{'+' if v >= 0 else '-'} {abs(v):.17g} {self.var_names[i]}" for i, v in zip(idx, val)]
            return " ".join(parts) if parts else "0 " + (self.var_names[0] if self.var_names else "")

        rel_txt = {"<=": "<=", ">=": ">=", "==": "="}
        out = [f"\\ {self.name}", "Minimize"]
        nz = [(i, c) for i, c in enumerate(self.cost) if c != 0]
        out.append(" obj: " + term_list([i for i, _ in nz], [c for _, c in nz]))
        out.append("Subject To")
        for r in range(self.n_rows):
            out.append(f" c{r}: {term_list(self._row_idx[r], self._row_val[r])} "
                       f"{rel_txt[self.relations[r]]} {self.rhs[r]:.17g}")
        out.append("Bounds")
        for name, lo, hi in zip(self.var_names, self.lb, self.ub):
            if lo == -INF and hi == INF:
                out.append(f" {name} free")
            else:
                lo_s = "-inf" if lo == -INF else f"{lo:.17g}"
                hi_s = "+inf" if hi == INF else f"{hi:.17g}"
                out.append(f" {lo_s} <= {name} <= {hi_s}")
        out.append("End")
        return "\n".join(out) + "\n"


def solve(lp: LinearProgram, method: str = "highs", dump_path: str | None = None) -> LpSolution:
    """Solve ``lp`` with ``method`` in {"highs", "simplex"}.

    ``dump_path`` writes the problem in LP text format before solving.
    """
    if dump_path is not None:
        with open(dump_path, "w") as fh:
            fh.write(lp.to_lp_text())
    if method not in ("highs", "simplex"):
        raise ValueError(f"unknown LP method {method!r}")
    if lp.n_vars == 0:
        ok = all((rel == "<=" and 0 <= b) or (rel == ">=" and 0 >= b) or (rel == "==" and b == 0)
                 for rel, b in zip(lp.relations, lp.rhs))
        if not ok:
            return LpSolution(LpStatus.INFEASIBLE)
        return LpSolution(LpStatus.OPTIMAL, np.zeros(0), lp.objective_constant)
    if method == "highs":
        return _solve_highs(lp)
    return _solve_simplex(lp)


# --- HiGHS -----------------------------------------------------------------

_TIGHT = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def _highs_raw(lp: LinearProgram, cost: np.ndarray, options=_TIGHT):
    a = lp.matrix()
    rel = np.asarray(lp.relations)
    rhs = np.asarray(lp.rhs, dtype=float)
    le, ge, eq = rel == "<=", rel == ">=", rel == "=="
    a_ub = sp.vstack([a[le], -a[ge]]) if (le.any() or ge.any()) else None
    b_ub = np.r_[rhs[le], -rhs[ge]] if a_ub is not None else None
    a_eq = a[eq] if eq.any() else None
    b_eq = rhs[eq] if eq.any() else None
    return linprog(
        cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
        bounds=list(zip(lp.lb, lp.ub)), method="highs",
        options=dict(options),
    )


def _solve_highs(lp: LinearProgram) -> LpSolution:
    cost = np.asarray(lp.cost, dtype=float)
    res = _highs_raw(lp, cost)
    if res.status not in (0, 2, 3):
        # tight tolerances occasionally leave HiGHS without a verdict on
        # badly scaled models; its defaults usually settle them
        res = _highs_raw(lp, cost, {})
    iters = int(getattr(res, "nit", 0) or 0)
    if res.status == 0:
        x = np.clip(res.x, lp.lb, lp.ub)
        return LpSolution(LpStatus.OPTIMAL, x, lp.evaluate(x), iters)
    if res.status == 2:
        # presolve may say "infeasible" for "infeasible or unbounded"
        if np.any(cost != 0) and _highs_raw(lp, np.zeros_like(cost)).status == 0:
            return LpSolution(LpStatus.UNBOUNDED, iterations=iters)
        return LpSolution(LpStatus.INFEASIBLE, iterations=iters)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, iterations=iters)
    return LpSolution(LpStatus.FAILED, iterations=iters)


# --- bounded-variable primal simplex ---------------------------------------

_PIVOT_TOL = 1e-9
_COST_TOL = 1e-9
_PHASE1_TOL = 1e-7


def _standard_form(lp: LinearProgram):
    """Rewrite as  A y = b, 0 <= y <= u,  with x = offset + T y.

    Returns (A dense, b, u, c, const, T dense, offset).
    """
    n = lp.n_vars
    lb, ub = np.asarray(lp.lb), np.asarray(lp.ub)
    cols_t, u, offset = [], [], np.zeros(n)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        if lb[j] > -INF:
            offset[j] = lb[j]
            cols_t.append(e)
            u.append(ub[j] - lb[j])
        elif ub[j] < INF:
            offset[j] = ub[j]
            cols_t.append(-e)
            u.append(INF)
        else:
            cols_t.append(e)
            cols_t.append(-e)
            u.extend([INF, INF])
    t = np.column_stack(cols_t) if cols_t else np.zeros((n, 0))

    a = lp.matrix().toarray()
    rhs = np.asarray(lp.rhs, dtype=float) - a @ offset
    a_y = a @ t
    m = lp.n_rows
    slack_cols = []
    for r, rel in enumerate(lp.relations):
        if rel == "==":
            continue
        col = np.zeros(m)
        col[r] = 1.0 if rel == "<=" else -1.0
        slack_cols.append(col)
        u.append(INF)
    a_std = np.hstack([a_y, np.column_stack(slack_cols)]) if slack_cols else a_y
    t_full = np.hstack([t, np.zeros((n, len(slack_cols)))])

    scale = np.max(np.abs(a_std), axis=1, initial=0.0) if m else np.zeros(0)
    scale[scale == 0] = 1.0
    a_std = a_std / scale[:, None]
    rhs = rhs / scale
    flip = rhs < 0
    a_std[flip] *= -1
    rhs[flip] *= -1

    c = np.asarray(lp.cost, dtype=float)
    c_std = c @ t_full
    const = float(c @ offset) + lp.objective_constant
    return a_std, rhs, np.asarray(u, dtype=float), c_std, const, t_full, offset


class _Tableau:
    def __init__(self, tab: np.ndarray, xb: np.ndarray, basis: np.ndarray, ub: np.ndarray):
        self.tab = tab
        self.xb = xb
        self.basis = basis
        self.ub = ub
        self.at_upper = np.zeros(tab.shape[1], dtype=bool)
        self.iterations = 0

    def pivot(self, r: int, j: int, value: float):
        row = self.tab[r] / self.tab[r, j]
        self.tab -= np.outer(self.tab[:, j], row)
        self.tab[r] = row
        self.basis[r] = j
        self.xb[r] = value
        self.at_upper[j] = False

    def run(self, cost: np.ndarray, allowed: np.ndarray, max_iter: int) -> str:
        """Iterate to optimality; returns "optimal", "unbounded" or "limit"."""
        m, ncol = self.tab.shape
        is_basic = np.zeros(ncol, dtype=bool)
        while True:
            if self.iterations >= max_iter:
                return "limit"
            self.iterations += 1
            is_basic[:] = False
            is_basic[self.basis] = True
            d = cost - cost[self.basis] @ self.tab
            improving = allowed & ~is_basic & (
                (~self.at_upper & (d < -_COST_TOL)) | (self.at_upper & (d > _COST_TOL))
            )
            cand = np.flatnonzero(improving)
            if len(cand) == 0:
                return "optimal"
            j = int(cand[0])
            sgn = -1.0 if self.at_upper[j] else 1.0
            alpha = sgn * self.tab[:, j]

            ratio = np.full(m, INF)
            dec = alpha > _PIVOT_TOL
            ratio[dec] = np.maximum(self.xb[dec], 0.0) / alpha[dec]
            ub_b = self.ub[self.basis]
            inc = (alpha < -_PIVOT_TOL) & np.isfinite(ub_b)
            ratio[inc] = np.maximum(ub_b[inc] - self.xb[inc], 0.0) / -alpha[inc]
            t_min = ratio.min() if m else INF
            t_flip = self.ub[j]

            if t_flip <= t_min:
                if not math.isfinite(t_flip):
                    return "unbounded"
                self.xb -= alpha * t_flip
                self.at_upper[j] = not self.at_upper[j]
                continue

            ties = np.flatnonzero(ratio <= t_min + 1e-12 * max(1.0, t_min))
            r = int(ties[np.argmin(self.basis[ties])])
            leaving = self.basis[r]
            hits_upper = bool(inc[r])
            entering_value = t_min if sgn > 0 else self.ub[j] - t_min
            self.xb -= alpha * t_min
            self.pivot(r, j, entering_value)
            self.at_upper[leaving] = hits_upper


def _solve_simplex(lp: LinearProgram, max_iter: int | None = None) -> LpSolution:
    a, b, u, c, _, t_map, offset = _standard_form(lp)
    m, n = a.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    # phase 1: one artificial per row, identity start basis
    tab = np.hstack([a, np.eye(m)])
    ub = np.r_[u, np.full(m, INF)]
    tb = _Tableau(tab, b.copy(), np.arange(n, n + m), ub)
    cost1 = np.r_[np.zeros(n), np.ones(m)]
    allowed = np.ones(n + m, dtype=bool)
    if tb.run(cost1, allowed, max_iter) == "limit":
        return LpSolution(LpStatus.FAILED, iterations=tb.iterations)
    infeas = float(tb.xb[tb.basis >= n].sum())
    if infeas > _PHASE1_TOL:
        return LpSolution(LpStatus.INFEASIBLE, iterations=tb.iterations)

    # drive zero-valued artificials out of the basis, dropping redundant rows
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if tb.basis[r] < n:
            continue
        row = np.abs(tb.tab[r, :n])
        row[tb.basis[tb.basis < n]] = 0.0
        cand = np.flatnonzero(row > _PIVOT_TOL)
        if len(cand) == 0:
            keep[r] = False
            continue
        j = int(cand[0])
        value = tb.ub[j] if tb.at_upper[j] else 0.0
        tb.pivot(r, j, value)
    tb.tab = tb.tab[keep][:, :n]
    tb.xb = tb.xb[keep]
    tb.basis = tb.basis[keep]
    tb.ub = u
    tb.at_upper = tb.at_upper[:n]

    outcome = tb.run(c, np.ones(n, dtype=bool), max_iter)
    if outcome == "limit":
        return LpSolution(LpStatus.FAILED, iterations=tb.iterations)
    if outcome == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, iterations=tb.iterations)

    y = np.where(tb.at_upper, u, 0.0)
    y[tb.basis] = 0.0
    if len(tb.basis):
        # refine basic values against the original rows
        rows = np.flatnonzero(keep)
        basis_mat = a[np.ix_(rows, tb.basis)]
        try:
            y[tb.basis] = np.linalg.solve(basis_mat, b[rows] - a[rows] @ y)
        except np.linalg.LinAlgError:
            y[tb.basis] = tb.xb
    x = offset + t_map @ y
    if not np.all(np.isfinite(x)):
        return LpSolution(LpStatus.FAILED, iterations=tb.iterations)
    x = np.clip(x, lp.lb, lp.ub)
    if lp.max_violation(x) > 1e-7:
        return LpSolution(LpStatus.FAILED, x, iterations=tb.iterations)
    return LpSolution(LpStatus.OPTIMAL, x, lp.evaluate(x), tb.iterations)
