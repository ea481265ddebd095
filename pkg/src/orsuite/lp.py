"""Dense two-phase simplex for small linear programs with variable bounds.

Built for the planning problems in this package: a few hundred variables,
dense-friendly sizes, and a hard requirement of deterministic pivoting so
seeded benchmark runs are exactly reproducible. Maximization is handled by
negating the objective at the boundary; the engine always minimizes.

Degenerate problems are common here (lots of flow-balance equalities), so the
pivot rule starts as classic Dantzig and falls back to Bland's rule once the
objective stalls, which guarantees termination.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ConfigError

LE = "<="
GE = ">="
EQ = "="

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"

_STALL_WINDOW = 60


@dataclass
class LpProblem:
    """min/max c.x subject to a x (sense) b, lower <= x <= upper."""

    c: np.ndarray
    a: np.ndarray
    senses: list[str]
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    maximize: bool = True
    names: list[str] | None = None

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=float)
        self.a = np.atleast_2d(np.asarray(self.a, dtype=float))
        self.b = np.asarray(self.b, dtype=float)
        n = self.c.shape[0]
        if self.a.size == 0:
            self.a = self.a.reshape(0, n)
        m = self.a.shape[0]
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.a.shape[1] != n:
            raise ConfigError(f"a has {self.a.shape[1]} columns, c has {n} entries")
        if self.b.shape[0] != m or len(self.senses) != m:
            raise ConfigError("b/senses length does not match the row count of a")
        if self.lower.shape[0] != n or self.upper.shape[0] != n:
            raise ConfigError("bound vectors must match the variable count")
        for s in self.senses:
            if s not in (LE, GE, EQ):
                raise ConfigError(f"unknown row sense {s!r}")
        if not np.all(np.isfinite(self.b)):
            raise ConfigError("right-hand sides must be finite")
        if np.any(self.lower > self.upper + 1e-12):
            raise ConfigError("lower bound exceeds upper bound")
        if self.names is None:
            self.names = [f"x{j}" for j in range(n)]

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]

    @property
    def num_rows(self) -> int:
        return self.a.shape[0]


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int
    # shadow prices of the original rows / finite upper bounds (see solve())
    row_duals: np.ndarray | None = None
    bound_duals: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class VerifyReport:
    max_row_violation: float
    max_bound_violation: float
    objective_error: float
    tol: float

    @property
    def ok(self) -> bool:
        return (
            self.max_row_violation <= self.tol
            and self.max_bound_violation <= self.tol
            and self.objective_error <= self.tol
        )


@dataclass
class _VarMap:
    # x_user = coef1 * z[col1] (+ coef2 * z[col2]) + offset
    col1: int
    coef1: float
    offset: float
    col2: int = -1
    coef2: float = 0.0
    bound_row: int = -1  # index into internal rows when a bound row was added


def _standardize(problem: LpProblem):
    """Rewrite to: min c_int.z, rows_int z (sense) rhs_int, z >= 0."""
    n = problem.num_vars
    sigma = -1.0 if problem.maximize else 1.0
    var_maps: list[_VarMap] = []
    cols = 0
    for j in range(n):
        lo, up = problem.lower[j], problem.upper[j]
        if np.isfinite(lo):
            var_maps.append(_VarMap(col1=cols, coef1=1.0, offset=lo))
            cols += 1
        elif np.isfinite(up):
            # only an upper bound: x = up - z
            var_maps.append(_VarMap(col1=cols, coef1=-1.0, offset=up))
            cols += 1
        else:
            var_maps.append(_VarMap(col1=cols, coef1=1.0, offset=0.0, col2=cols + 1, coef2=-1.0))
            cols += 2

    m = problem.num_rows
    rows = []  # (coefs over z, sense, rhs, kind, user_index)
    for i in range(m):
        coefs = np.zeros(cols)
        rhs = problem.b[i]
        for j, vm in enumerate(var_maps):
            aij = problem.a[i, j]
            if aij == 0.0:
                continue
            coefs[vm.col1] += aij * vm.coef1
            if vm.col2 >= 0:
                coefs[vm.col2] += aij * vm.coef2
            rhs -= aij * vm.offset
        rows.append([coefs, problem.senses[i], rhs, "row", i])

    for j, vm in enumerate(var_maps):
        lo, up = problem.lower[j], problem.upper[j]
        if np.isfinite(lo) and np.isfinite(up):
            coefs = np.zeros(cols)
            coefs[vm.col1] = 1.0
            vm.bound_row = len(rows)
            rows.append([coefs, LE, up - lo, "bound", j])

    c_int = np.zeros(cols)
    const = 0.0
    for j, vm in enumerate(var_maps):
        cj = problem.c[j]
        c_int[vm.col1] += sigma * cj * vm.coef1
        if vm.col2 >= 0:
            c_int[vm.col2] += sigma * cj * vm.coef2
        const += cj * vm.offset
    return c_int, rows, var_maps, const, sigma


def solve(problem: LpProblem, max_iterations: int = 20000) -> LpSolution:
    """Solve the LP. Deterministic: identical input gives identical pivots.

    Row duals are reported as shadow prices of the original rows in the
    problem's own orientation (d objective / d b_i); bound duals likewise for
    finite upper bounds of variables that also carry a finite lower bound.
    """
    c_int, rows, var_maps, const, sigma = _standardize(problem)
    n_struct = c_int.shape[0]
    m = len(rows)

    flips = np.ones(m)
    n_slack = sum(1 for r in rows if r[1] != EQ)
    n_art = sum(1 for r in rows if r[1] != LE or r[2] < 0)
    # columns: structural | slack/surplus | artificial | rhs
    width = n_struct + n_slack + n_art + 1
    tab = np.zeros((m, width))
    basis = np.full(m, -1, dtype=int)
    ref_col = np.full(m, -1, dtype=int)  # column carrying +e_i with zero cost
    slack_at = n_struct
    art_at = n_struct + n_slack
    art_cols = []
    for i, (coefs, sense, rhs, _, _) in enumerate(rows):
        if rhs < 0:
            coefs = -coefs
            rhs = -rhs
            flips[i] = -1.0
            sense = {LE: GE, GE: LE, EQ: EQ}[sense]
        tab[i, :n_struct] = coefs
        tab[i, -1] = rhs
        if sense == LE:
            tab[i, slack_at] = 1.0
            basis[i] = slack_at
            ref_col[i] = slack_at
            slack_at += 1
        elif sense == GE:
            tab[i, slack_at] = -1.0
            slack_at += 1
            tab[i, art_at] = 1.0
            basis[i] = art_at
            ref_col[i] = art_at
            art_cols.append(art_at)
            art_at += 1
        else:
            tab[i, art_at] = 1.0
            basis[i] = art_at
            ref_col[i] = art_at
            art_cols.append(art_at)
            art_at += 1
    art_cols = np.array(art_cols, dtype=int)

    iterations = 0

    def pivot(r: int, e: int, obj: np.ndarray) -> None:
        nonlocal tab
        piv = tab[r, e]
        tab[r] = tab[r] / piv
        col = tab[:, e].copy()
        col[r] = 0.0
        tab -= np.outer(col, tab[r])
        obj -= obj[e] * tab[r]
        basis[r] = e

    def run_phase(obj: np.ndarray, barred: np.ndarray) -> str:
        nonlocal iterations
        bland = False
        stall = 0
        last_val = obj[-1]
        while True:
            reduced = obj[:-1].copy()
            reduced[barred] = np.inf
            if bland:
                cand = np.flatnonzero(reduced < -PIVOT_TOL)
                if cand.size == 0:
                    return OPTIMAL
                e = int(cand[0])
            else:
                e = int(np.argmin(reduced))
                if reduced[e] >= -PIVOT_TOL:
                    return OPTIMAL
            colvals = tab[:, e]
            pos = colvals > PIVOT_TOL
            if not np.any(pos):
                return UNBOUNDED
            ratios = np.full(m, np.inf)
            ratios[pos] = tab[pos, -1] / colvals[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12)
            r = int(ties[np.argmin(basis[ties])])
            pivot(r, e, obj)
            iterations += 1
            if iterations >= max_iterations:
                return ITERATION_LIMIT
            if abs(obj[-1] - last_val) <= 1e-12:
                stall += 1
                if stall >= _STALL_WINDOW:
                    bland = True
            else:
                stall = 0
                last_val = obj[-1]

    # phase 1: drive artificials to zero
    if art_cols.size:
        obj1 = np.zeros(width)
        for i in range(m):
            if basis[i] in art_cols:
                obj1 -= tab[i]
        obj1[art_cols] = 0.0
        barred1 = np.zeros(width - 1, dtype=bool)
        barred1[art_cols] = True  # artificials never re-enter
        status = run_phase(obj1, barred1)
        if status == ITERATION_LIMIT:
            return LpSolution(ITERATION_LIMIT, None, None, iterations)
        # the phase-1 objective is bounded below by zero, so an "unbounded"
        # here can only be numerical noise; treat it as infeasibility
        if status == UNBOUNDED or -obj1[-1] > FEAS_TOL:
            return LpSolution(INFEASIBLE, None, None, iterations)
        # pivot still-basic artificials out where the row has real support
        for i in range(m):
            if basis[i] in art_cols:
                support = np.flatnonzero(np.abs(tab[i, : n_struct + n_slack]) > PIVOT_TOL)
                if support.size:
                    dummy = np.zeros(width)
                    pivot(i, int(support[0]), dummy)

    # phase 2: original objective
    barred2 = np.zeros(width - 1, dtype=bool)
    if art_cols.size:
        barred2[art_cols] = True
    obj2 = np.zeros(width)
    obj2[:n_struct] = c_int
    for i in range(m):
        if obj2[basis[i]] != 0.0:
            obj2 -= obj2[basis[i]] * tab[i]
    status = run_phase(obj2, barred2)

    z = np.zeros(width - 1)
    z[basis] = np.maximum(tab[:, -1], 0.0)
    x = np.empty(problem.num_vars)
    for j, vm in enumerate(var_maps):
        val = vm.coef1 * z[vm.col1] + vm.offset
        if vm.col2 >= 0:
            val += vm.coef2 * z[vm.col2]
        x[j] = val
    obj_val = sigma * (-obj2[-1]) + const

    if status != OPTIMAL:
        if status == UNBOUNDED:
            return LpSolution(UNBOUNDED, None, None, iterations)
        return LpSolution(ITERATION_LIMIT, x, obj_val, iterations)

    # duals from the final reduced-cost row: reference column of internal row i
    # holds -y_i; translate to shadow prices in the user's orientation.
    y_int = np.array([-obj2[ref_col[i]] for i in range(m)])
    row_duals = np.zeros(problem.num_rows)
    bound_duals = np.zeros(problem.num_vars)
    for i, (_, _, _, kind, idx) in enumerate(rows):
        shadow = sigma * flips[i] * y_int[i]
        if kind == "row":
            row_duals[idx] = shadow
        else:
            bound_duals[idx] = shadow
    return LpSolution(OPTIMAL, x, obj_val, iterations, row_duals, bound_duals)


def verify(problem: LpProblem, solution: LpSolution, tol: float = FEAS_TOL) -> VerifyReport:
    """Residual check straight from the problem data; no solver internals."""
    if solution.x is None:
        raise ConfigError("solution carries no point to verify")
    x = solution.x
    act = problem.a @ x if problem.num_rows else np.zeros(0)
    row_viol = 0.0
    for i, sense in enumerate(problem.senses):
        if sense == LE:
            v = act[i] - problem.b[i]
        elif sense == GE:
            v = problem.b[i] - act[i]
        else:
            v = abs(act[i] - problem.b[i])
        row_viol = max(row_viol, float(v))
    bound_viol = float(
        max(
            np.max(problem.lower - x, initial=0.0),
            np.max(x - problem.upper, initial=0.0),
        )
    )
    obj_err = abs(float(problem.c @ x) - float(solution.objective))
    return VerifyReport(max(row_viol, 0.0), max(bound_viol, 0.0), obj_err, tol)


def format_problem(problem: LpProblem) -> str:
    """Human-readable equation dump, used when a planning solve goes wrong."""
    names = problem.names or [f"x{j}" for j in range(problem.num_vars)]

    def terms(coefs: Sequence[float]) -> str:
        parts = []
        for j, cj in enumerate(coefs):
            if cj == 0.0:
                continue
            parts.append(f"{'+' if cj >= 0 and parts else ''}{cj:g} {names[j]}")
        return " ".join(parts) if parts else "0"

    lines = [("maximize " if problem.maximize else "minimize ") + terms(problem.c)]
    lines.append("subject to")
    for i in range(problem.num_rows):
        lines.append(f"  r{i}: {terms(problem.a[i])} {problem.senses[i]} {problem.b[i]:g}")
    for j in range(problem.num_vars):
        lines.append(f"  {problem.lower[j]:g} <= {names[j]} <= {problem.upper[j]:g}")
    return "\n".join(lines)
