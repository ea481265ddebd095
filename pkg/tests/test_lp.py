"""Simplex solver checked against an independent vertex-enumeration oracle."""
import itertools

import numpy as np
import pytest

from orsuite import lp
from orsuite.core import ConfigError


def _best_vertex_value(problem: lp.LpProblem, tol: float = 1e-7):
    """Enumerate candidate vertices: every choice of n active constraints
    among {rows as equalities, active bounds}. Independent of the solver."""
    n = problem.num_vars
    rows = [(problem.a[i], problem.b[i]) for i in range(problem.num_rows)]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        if np.isfinite(problem.lower[j]):
            rows.append((e, problem.lower[j]))
        if np.isfinite(problem.upper[j]):
            rows.append((e.copy(), problem.upper[j]))
    mats, rhss = [], []
    for combo in itertools.combinations(range(len(rows)), n):
        mats.append([rows[i][0] for i in combo])
        rhss.append([rows[i][1] for i in combo])
    mats = np.array(mats)
    rhss = np.array(rhss)
    dets = np.abs(np.linalg.det(mats))
    keep = dets > 1e-9
    if not np.any(keep):
        return None
    points = np.linalg.solve(mats[keep], rhss[keep][..., None])[..., 0]
    act = points @ problem.a.T if problem.num_rows else np.zeros((len(points), 0))
    feas = np.ones(len(points), dtype=bool)
    for i, sense in enumerate(problem.senses):
        if sense == lp.LE:
            feas &= act[:, i] <= problem.b[i] + tol
        elif sense == lp.GE:
            feas &= act[:, i] >= problem.b[i] - tol
        else:
            feas &= np.abs(act[:, i] - problem.b[i]) <= tol
    feas &= np.all(points >= problem.lower - tol, axis=1)
    feas &= np.all(points <= problem.upper + tol, axis=1)
    if not np.any(feas):
        return None
    vals = points[feas] @ problem.c
    return float(vals.max() if problem.maximize else vals.min())


def _random_feasible_lp(rng: np.random.Generator) -> lp.LpProblem:
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 7))
    a = rng.integers(-4, 5, size=(m, n)).astype(float)
    x0 = rng.uniform(0.0, 4.0, size=n)
    lower = np.zeros(n)
    upper = x0 + rng.uniform(0.5, 5.0, size=n)
    senses = []
    b = np.empty(m)
    act = a @ x0
    for i in range(m):
        kind = rng.integers(0, 3)
        if kind == 0:
            senses.append(lp.LE)
            b[i] = act[i] + rng.uniform(0.0, 3.0)
        elif kind == 1:
            senses.append(lp.GE)
            b[i] = act[i] - rng.uniform(0.0, 3.0)
        else:
            senses.append(lp.EQ)
            b[i] = act[i]
    c = rng.normal(size=n)
    return lp.LpProblem(c=c, a=a, senses=senses, b=b, lower=lower, upper=upper,
                        maximize=bool(rng.integers(0, 2)))


def test_two_variable_vertex():
    prob = lp.LpProblem(
        c=[1.0, 1.0],
        a=[[1.0, 2.0], [1.0, 0.0]],
        senses=[lp.LE, lp.LE],
        b=[4.0, 3.0],
        lower=[0.0, 0.0],
        upper=[np.inf, np.inf],
    )
    sol = lp.solve(prob)
    assert sol.status == lp.OPTIMAL
    assert sol.objective == pytest.approx(3.5, abs=1e-9)
    assert sol.x == pytest.approx([3.0, 0.5], abs=1e-9)


def test_infeasible_detected():
    prob = lp.LpProblem(
        c=[1.0],
        a=[[1.0]],
        senses=[lp.LE],
        b=[-1.0],
        lower=[0.0],
        upper=[np.inf],
    )
    assert lp.solve(prob).status == lp.INFEASIBLE


def test_unbounded_detected():
    prob = lp.LpProblem(
        c=[1.0],
        a=np.zeros((0, 1)),
        senses=[],
        b=[],
        lower=[0.0],
        upper=[np.inf],
    )
    assert lp.solve(prob).status == lp.UNBOUNDED


def test_iteration_limit_status():
    rng = np.random.default_rng(5)
    prob = _random_feasible_lp(rng)
    sol = lp.solve(prob, max_iterations=1)
    assert sol.status in (lp.ITERATION_LIMIT, lp.OPTIMAL)


def test_degenerate_redundant_rows_still_optimal():
    # same facet repeated three times plus a redundant equality
    prob = lp.LpProblem(
        c=[2.0, 1.0],
        a=[[1.0, 1.0], [1.0, 1.0], [2.0, 2.0], [1.0, -1.0]],
        senses=[lp.LE, lp.LE, lp.LE, lp.EQ],
        b=[2.0, 2.0, 4.0, 0.0],
        lower=[0.0, 0.0],
        upper=[np.inf, np.inf],
    )
    sol = lp.solve(prob)
    assert sol.status == lp.OPTIMAL
    assert sol.objective == pytest.approx(3.0, abs=1e-8)
    assert lp.verify(prob, sol).ok


def test_matches_vertex_enumeration_on_random_lps():
    rng = np.random.default_rng(20240817)
    checked = 0
    for _ in range(200):
        prob = _random_feasible_lp(rng)
        sol = lp.solve(prob)
        assert sol.status == lp.OPTIMAL, lp.format_problem(prob)
        best = _best_vertex_value(prob)
        assert best is not None
        scale = max(1.0, abs(best))
        assert abs(sol.objective - best) <= 1e-6 * scale, lp.format_problem(prob)
        assert lp.verify(prob, sol, tol=1e-6).ok
        checked += 1
    assert checked == 200


def test_dual_certificate_on_box_lps():
    # max c.x, A x <= b, 0 <= x <= u: duals y, w >= 0 with A'y + w >= c and
    # b.y + u.w equal to the optimal objective
    rng = np.random.default_rng(99)
    for _ in range(60):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        a = rng.integers(-3, 4, size=(m, n)).astype(float)
        x0 = rng.uniform(0.0, 3.0, size=n)
        b = a @ x0 + rng.uniform(0.1, 2.0, size=m)
        u = x0 + rng.uniform(0.5, 4.0, size=n)
        prob = lp.LpProblem(c=rng.normal(size=n), a=a, senses=[lp.LE] * m, b=b,
                            lower=np.zeros(n), upper=u, maximize=True)
        sol = lp.solve(prob)
        assert sol.status == lp.OPTIMAL
        y = sol.row_duals
        w = sol.bound_duals
        assert np.all(y >= -1e-8)
        assert np.all(w >= -1e-8)
        assert np.all(a.T @ y + w >= prob.c - 1e-7)
        assert b @ y + u @ w == pytest.approx(sol.objective, abs=1e-7)


def test_verify_flags_corrupted_point():
    prob = lp.LpProblem(
        c=[1.0, 1.0],
        a=[[1.0, 2.0]],
        senses=[lp.LE],
        b=[4.0],
        lower=[0.0, 0.0],
        upper=[np.inf, np.inf],
    )
    sol = lp.solve(prob)
    assert lp.verify(prob, sol).ok
    sol.x = sol.x + 10.0
    assert not lp.verify(prob, sol).ok


def test_deterministic_resolve():
    rng = np.random.default_rng(7)
    prob = _random_feasible_lp(rng)
    s1 = lp.solve(prob)
    s2 = lp.solve(prob)
    assert s1.iterations == s2.iterations
    assert np.array_equal(s1.x, s2.x)


def test_bad_problem_rejected():
    with pytest.raises(ConfigError):
        lp.LpProblem(c=[1.0], a=[[1.0]], senses=["<"], b=[1.0],
                     lower=[0.0], upper=[np.inf])
    with pytest.raises(ConfigError):
        lp.LpProblem(c=[1.0], a=[[1.0]], senses=[lp.LE], b=[1.0],
                     lower=[2.0], upper=[1.0])


def test_format_problem_mentions_rows_and_bounds():
    prob = lp.LpProblem(c=[1.0, 2.0], a=[[1.0, 1.0]], senses=[lp.LE], b=[4.0],
                        lower=[0.0, 0.0], upper=[np.inf, 3.0])
    text = lp.format_problem(prob)
    assert "maximize" in text
    assert "<= 4" in text
    assert "x1" in text
