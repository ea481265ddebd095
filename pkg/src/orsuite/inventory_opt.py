"""Planning baselines for the inventory chain.

Three routes of increasing information:
  * base-stock levels fit by derivative-free search on a handful of frozen
    demand sample paths (static policy),
  * a shrinking-horizon LP re-solved every period with expected demand,
  * a perfect-information LP over the realized demand path (the oracle bound).

The two LP routes share one model builder; the oracle also acts as an upper
bound certificate for any simulated policy on the same path.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import optimize as scipy_optimize

from . import lp
from .core import ConfigError, OrSuiteError, RngStream
from .inventory import (
    ChainState,
    SupplyChainConfig,
    base_stock_requests,
    initial_state,
    levels_from_increments,
    sample_demand_paths,
    transition,
)


class PlanningError(OrSuiteError):
    """A planning LP failed to solve; carries the model dump head."""


def sample_path_objective(
    increments: np.ndarray, demand_paths: np.ndarray, config: SupplyChainConfig
) -> float:
    """Mean per-period chain profit of a base-stock policy over fixed paths."""
    z = levels_from_increments(increments)
    paths = np.atleast_2d(np.asarray(demand_paths, dtype=float))
    if paths.shape[1] != config.periods:
        raise ConfigError("demand paths must cover every period")
    total = 0.0
    for path in paths:
        state = initial_state(config)
        for t in range(config.periods):
            requests = base_stock_requests(state, z, config)
            state, profits = transition(state, requests, float(path[t]), config)
            total += float(profits.sum())
    return total / (paths.shape[0] * config.periods)


@dataclass
class PowellResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool  # false when the iteration cap stopped the search


def powell_optimize(
    objective,
    x0: np.ndarray,
    tol: float = 1e-2,
    max_iterations: int = 200,
) -> PowellResult:
    """Maximize a derivative-free objective over the nonnegative orthant.

    Coordinate/conjugate direction search; the returned point never scores
    worse than the start.
    """
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 < 0):
        raise ConfigError("start point must be nonnegative")

    def negated(x: np.ndarray) -> float:
        return -float(objective(np.maximum(x, 0.0)))

    res = scipy_optimize.minimize(
        negated,
        x0,
        method="Powell",
        bounds=[(0.0, None)] * x0.shape[0],
        options={"xtol": tol, "ftol": tol, "maxiter": max_iterations},
    )
    x = np.maximum(np.asarray(res.x, dtype=float), 0.0)
    value = float(objective(x))
    start_value = float(objective(x0))
    if value < start_value:
        return PowellResult(x0, start_value, int(res.nit), bool(res.success))
    return PowellResult(x, value, int(res.nit), bool(res.success))


def integer_polish(x: np.ndarray, objective) -> tuple[np.ndarray, float]:
    """Round to integers, then take the best point of the +/-1 neighborhood."""
    base = np.maximum(np.round(np.asarray(x, dtype=float)), 0.0)
    best_x = base
    best_value = float(objective(base))
    for offsets in itertools.product((-1.0, 0.0, 1.0), repeat=base.shape[0]):
        cand = np.maximum(base + np.asarray(offsets), 0.0)
        if np.array_equal(cand, base):
            continue
        value = float(objective(cand))
        if value > best_value:
            best_x, best_value = cand, value
    return best_x, best_value


@dataclass
class DfoResult:
    levels: np.ndarray  # integer base-stock targets per ordering stage
    increments: np.ndarray
    value: float  # sample-path objective at the polished point
    powell: PowellResult


def optimize_base_stock(
    config: SupplyChainConfig,
    n_paths: int = 4,
    seed: int = 0,
    x0: np.ndarray | None = None,
    tol: float = 1e-2,
    max_iterations: int = 200,
) -> DfoResult:
    """Fit integer base-stock levels on frozen sample paths (common random
    numbers across all candidate evaluations)."""
    if x0 is None:
        x0 = np.full(config.ordering_stages, 20.0)
    paths = sample_demand_paths(config, n_paths, RngStream(seed, "dfo"))

    def objective(x: np.ndarray) -> float:
        return sample_path_objective(x, paths, config)

    search = powell_optimize(objective, x0, tol=tol, max_iterations=max_iterations)
    increments, value = integer_polish(search.x, objective)
    return DfoResult(
        levels=levels_from_increments(increments),
        increments=increments,
        value=value,
        powell=search,
    )


# -- LP planning ---------------------------------------------------------


@dataclass
class _ChainLpIndex:
    """Column bookkeeping for the chain LP."""

    m_stages: int
    horizon: int

    def reorder(self, m: int, k: int) -> int:
        return m * self.horizon + k

    def inventory(self, m: int, k: int) -> int:
        # on-hand at the start of offset k, defined for k >= 1
        return self.m_stages * self.horizon + m * self.horizon + (k - 1)

    def sold(self, k: int) -> int:
        return 2 * self.m_stages * self.horizon + k

    def retail_backlog(self, k: int) -> int:
        return 2 * self.m_stages * self.horizon + self.horizon + k

    def count(self, with_backlog: bool) -> int:
        base = 2 * self.m_stages * self.horizon + self.horizon
        return base + (self.horizon if with_backlog else 0)


def build_chain_lp(
    config: SupplyChainConfig, state: ChainState, demands: np.ndarray
) -> tuple[lp.LpProblem, float, _ChainLpIndex]:
    """LP over the remaining horizon: decide reorders, let sales/backlog/
    inventory follow the chain dynamics with requested == accepted.

    Returns (problem, objective offset, index map). The LP relaxes
    integrality, so its optimum upper-bounds any integer policy's profit on
    the same demands.
    """
    demands = np.asarray(demands, dtype=float)
    m_stages = config.ordering_stages
    horizon = demands.shape[0]
    if horizon < 1:
        raise ConfigError("planning horizon must cover at least one period")
    t0 = state.period
    idx = _ChainLpIndex(m_stages, horizon)
    n = idx.count(config.backlog)

    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    for m in range(m_stages):
        for k in range(horizon):
            upper[idx.reorder(m, k)] = config.capacity[m]

    arrivals_const = np.zeros((m_stages, horizon))
    for m in range(m_stages):
        for qty, due in state.pipeline[m]:
            k = int(due) - t0
            if 0 <= k < horizon:
                arrivals_const[m, k] += qty
            elif k < 0:
                arrivals_const[m, 0] += qty  # overdue entries land now

    b0_init = float(state.backlog[0]) if config.backlog else 0.0

    rows: list[np.ndarray] = []
    senses: list[str] = []
    rhs: list[float] = []

    def new_row() -> np.ndarray:
        rows.append(np.zeros(n))
        return rows[-1]

    # inventory balance per ordering stage and period
    for m in range(m_stages):
        lead = config.lead_time[m]
        for k in range(horizon):
            row = new_row()
            row[idx.inventory(m, k + 1)] = 1.0
            rhs_val = arrivals_const[m, k]
            if k > 0:
                row[idx.inventory(m, k)] = -1.0
            else:
                rhs_val += float(state.on_hand[m])
            if k - lead >= 0:
                row[idx.reorder(m, k - lead)] -= 1.0
            if m == 0:
                row[idx.sold(k)] += 1.0
            else:
                row[idx.reorder(m - 1, k)] += 1.0
            senses.append(lp.EQ)
            rhs.append(rhs_val)

    # retail demand: backlogged or lost
    for k in range(horizon):
        row = new_row()
        if config.backlog:
            row[idx.retail_backlog(k)] = 1.0
            row[idx.sold(k)] = 1.0
            if k > 0:
                row[idx.retail_backlog(k - 1)] = -1.0
            senses.append(lp.EQ)
            rhs.append(float(demands[k]) + (b0_init if k == 0 else 0.0))
        else:
            row[idx.sold(k)] = 1.0
            senses.append(lp.LE)
            rhs.append(float(demands[k]))

    # a stage can only accept what its supplier holds before arrivals
    for m in range(m_stages - 1):
        for k in range(horizon):
            row = new_row()
            row[idx.reorder(m, k)] = 1.0
            if k > 0:
                row[idx.inventory(m + 1, k)] = -1.0
                rhs.append(0.0)
            else:
                rhs.append(float(state.on_hand[m + 1]))
            senses.append(lp.LE)

    price = config.sales_price
    cost = config.purchase_cost
    penalty = config.unfulfilled_penalty
    c_obj = np.zeros(n)
    offset = 0.0
    top = config.stages - 1
    for k in range(horizon):
        disc = config.discount ** (t0 + k)
        c_obj[idx.sold(k)] += disc * price[0]
        for m in range(1, config.stages):
            c_obj[idx.reorder(m - 1, k)] += disc * price[m]
        for m in range(m_stages):
            c_obj[idx.reorder(m, k)] -= disc * cost[m]
        c_obj[idx.reorder(m_stages - 1, k)] -= disc * cost[top]
        if config.backlog:
            c_obj[idx.retail_backlog(k)] -= disc * penalty[0]
        else:
            c_obj[idx.sold(k)] += disc * penalty[0]
            offset -= disc * penalty[0] * float(demands[k])
        for m in range(m_stages):
            c_obj[idx.inventory(m, k + 1)] -= disc * config.holding_cost[m]

    problem = lp.LpProblem(
        c=c_obj,
        a=np.array(rows) if rows else np.zeros((0, n)),
        senses=senses,
        b=np.array(rhs),
        lower=lower,
        upper=upper,
        maximize=True,
    )
    return problem, offset, idx


def _solve_chain_lp(problem: lp.LpProblem, context: str) -> lp.LpSolution:
    solution = lp.solve(problem)
    if not solution.optimal:
        dump = "\n".join(lp.format_problem(problem).splitlines()[:40])
        raise PlanningError(f"{context}: solver status {solution.status}\n{dump}")
    return solution


def shlp_action(state: ChainState, config: SupplyChainConfig) -> np.ndarray:
    """Solve the remaining horizon with expected demand, execute period t only."""
    remaining = config.periods - state.period
    if remaining < 1:
        raise ConfigError("no periods left to plan")
    demands = np.full(remaining, float(config.demand_mean))
    problem, _, idx = build_chain_lp(config, state, demands)
    solution = _solve_chain_lp(problem, "shrinking-horizon plan")
    action = np.array(
        [solution.x[idx.reorder(m, 0)] for m in range(config.ordering_stages)]
    )
    return np.clip(np.round(action), 0.0, np.asarray(config.capacity, dtype=float))


class ShlpPolicy:
    """Re-plans every period against the env's exact chain state."""

    def __init__(self, env) -> None:
        self.env = env

    def __call__(self, obs) -> np.ndarray:
        return shlp_action(self.env.state, self.env.config)


@dataclass
class OracleResult:
    total: float  # LP optimum incl. constant terms
    plan: np.ndarray  # reorders, shape (ordering stages, periods)


def oracle_value(demand_path: np.ndarray, config: SupplyChainConfig) -> OracleResult:
    """Perfect-information LP over one realized demand path, from a fresh
    chain. Upper-bounds every simulated policy's total profit on that path
    (within LP integrality slack)."""
    demand_path = np.asarray(demand_path, dtype=float)
    if demand_path.shape != (config.periods,):
        raise ConfigError("demand path length must equal the horizon")
    state = initial_state(config)
    problem, offset, idx = build_chain_lp(config, state, demand_path)
    solution = _solve_chain_lp(problem, "oracle plan")
    plan = np.array(
        [
            [solution.x[idx.reorder(m, k)] for k in range(config.periods)]
            for m in range(config.ordering_stages)
        ]
    )
    return OracleResult(total=float(solution.objective) + offset, plan=plan)


def simulate_plan(
    plan: np.ndarray, demand_path: np.ndarray, config: SupplyChainConfig
) -> float:
    """Replay a reorder plan through the real dynamics; returns total profit.

    Used to cross-check the LP builder against the simulator: an LP-feasible
    plan replayed on the same demands recovers the LP objective.
    """
    plan = np.atleast_2d(np.asarray(plan, dtype=float))
    state = initial_state(config)
    total = 0.0
    for t in range(config.periods):
        state, profits = transition(state, plan[:, t], float(demand_path[t]), config)
        total += float(profits.sum())
    return total
