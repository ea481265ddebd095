"""Multi-period portfolio rebalancing with proportional transaction costs.

Cash is asset 0 at a fixed price of 1; the remaining assets have Gaussian
per-period prices. The action is a signed trade vector: sells execute first
(capped at holdings), buys after (scaled down pro-rata when the post-sale
cash cannot cover them), so cash and holdings never go negative. The only
reward is final wealth, paid on the last step.

A planning route solves the same dynamics as an LP with prices fixed at
their means, and a Monte Carlo route replays a fixed plan on sampled paths.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import lp
from .core import (
    ActionError,
    BoxSpace,
    ConfigError,
    Environment,
    Observation,
    RngStream,
    StepResult,
)

PRICE_FLOOR = 0.01  # Gaussian draws are truncated here; prices stay positive


def _default_price_mean(bases: tuple, horizon: int, growth: float) -> tuple:
    return tuple(
        tuple(base * (1.0 + growth) ** l for l in range(horizon + 1)) for base in bases
    )


@dataclass(frozen=True)
class MpaaConfig:
    """Price/cost parameters. `price_mean[i][l]` is asset i's mean at period l
    (periods 0..horizon inclusive); the std defaults to 5% of the mean."""

    n_assets: int = 3
    horizon: int = 10
    initial_cash: float = 100.0
    initial_holdings: tuple = (0.0, 0.0, 0.0)
    price_mean: tuple = ()  # filled from price_base/growth when empty
    price_std: tuple = ()
    sale_cost: tuple = (0.01, 0.01, 0.01)
    purchase_cost: tuple = (0.01, 0.01, 0.01)
    trade_bound: float = 2000.0
    price_base: tuple = (10.0, 20.0, 40.0)
    price_growth: float = 0.03
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_assets < 1:
            raise ConfigError("need at least one tradable asset")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least one period")
        if not self.price_mean:
            if len(self.price_base) != self.n_assets:
                raise ConfigError("price_base must have one entry per asset")
            object.__setattr__(
                self,
                "price_mean",
                _default_price_mean(self.price_base, self.horizon, self.price_growth),
            )
        if not self.price_std:
            object.__setattr__(
                self,
                "price_std",
                tuple(tuple(0.05 * m for m in row) for row in self.price_mean),
            )
        for name, rows in (("price_mean", self.price_mean), ("price_std", self.price_std)):
            if len(rows) != self.n_assets or any(
                len(row) != self.horizon + 1 for row in rows
            ):
                raise ConfigError(f"{name} must be {self.n_assets} x {self.horizon + 1}")
        if any(m <= 0 for row in self.price_mean for m in row):
            raise ConfigError("price means must be positive")
        if any(s < 0 for row in self.price_std for s in row):
            raise ConfigError("price stds must be nonnegative")
        for name, costs in (("sale_cost", self.sale_cost), ("purchase_cost", self.purchase_cost)):
            if len(costs) != self.n_assets:
                raise ConfigError(f"{name} must have one entry per asset")
            if any(not (0.0 <= c < 1.0) for c in costs):
                raise ConfigError(f"{name} entries must lie in [0, 1)")
        if self.trade_bound <= 0:
            raise ConfigError("trade_bound must be positive")
        if self.initial_cash < 0 or any(h < 0 for h in self.initial_holdings):
            raise ConfigError("initial cash and holdings must be nonnegative")
        if len(self.initial_holdings) != self.n_assets:
            raise ConfigError("initial_holdings must have one entry per asset")


@dataclass
class PortfolioState:
    period: int
    cash: float
    holdings: np.ndarray
    prices: np.ndarray  # current per-asset prices (cash excluded, its price is 1)

    def wealth(self) -> float:
        return float(self.cash + self.prices @ self.holdings)

    def copy(self) -> "PortfolioState":
        return PortfolioState(
            self.period, self.cash, self.holdings.copy(), self.prices.copy()
        )


def initial_portfolio(config: MpaaConfig, prices: np.ndarray) -> PortfolioState:
    return PortfolioState(
        period=0,
        cash=float(config.initial_cash),
        holdings=np.array(config.initial_holdings, dtype=float),
        prices=np.asarray(prices, dtype=float),
    )


def apply_trades(
    state: PortfolioState,
    delta: np.ndarray,
    config: MpaaConfig,
    next_prices: np.ndarray,
) -> tuple[PortfolioState, dict]:
    """Execute a signed trade vector and advance one period.

    Sells first, capped at current holdings; buys after, scaled down by a
    common factor when their total cost exceeds the post-sale cash. Info
    reports how much of the request survived projection.
    """
    delta = np.asarray(delta, dtype=float)
    if delta.shape != state.holdings.shape:
        raise ConfigError("trade vector length must match the asset count")
    sale = np.asarray(config.sale_cost)
    purchase = np.asarray(config.purchase_cost)

    sells = np.minimum(np.maximum(-delta, 0.0), state.holdings)
    proceeds = float(((1.0 - sale) * state.prices) @ sells)
    cash = state.cash + proceeds

    buys = np.maximum(delta, 0.0)
    cost = float(((1.0 + purchase) * state.prices) @ buys)
    scale = 1.0
    if cost > cash and cost > 0.0:
        scale = cash / cost
        buys = buys * scale
        cost = cash
    new = PortfolioState(
        period=state.period + 1,
        cash=max(cash - cost, 0.0),
        holdings=state.holdings - sells + buys,
        prices=np.asarray(next_prices, dtype=float),
    )
    info = {
        "buy_scale": scale,
        "sell_shortfall": float(np.sum(np.maximum(-delta, 0.0) - sells)),
    }
    return new, info


class AssetAllocationEnv(Environment):
    """Signed-trade portfolio episode; the reward is final wealth, sparse."""

    def __init__(self, config: MpaaConfig | None = None) -> None:
        config = config or MpaaConfig()
        super().__init__(config.seed)
        self.config = config
        n = config.n_assets
        self.action_space = BoxSpace(-config.trade_bound, config.trade_bound, n)
        self.observation_size = 1 + 2 * n
        self.max_steps = config.horizon
        self.price_path = np.asarray(config.price_mean, dtype=float).copy()
        self.state = initial_portfolio(config, self.price_path[:, 0])

    def _observe(self) -> Observation:
        vals = np.concatenate(
            [[self.state.cash], self.state.holdings, self.state.prices]
        )
        return Observation(values=vals.astype(float))

    def _reset(self, stream: RngStream) -> Observation:
        mean = np.asarray(self.config.price_mean, dtype=float)
        std = np.asarray(self.config.price_std, dtype=float)
        draws = stream.split("prices").generator.normal(mean, std)
        self.price_path = np.maximum(draws, PRICE_FLOOR)
        self.state = initial_portfolio(self.config, self.price_path[:, 0])
        return self._observe()

    def _step(self, action) -> StepResult:
        delta = np.asarray(action, dtype=float)
        bound = self.config.trade_bound
        if np.any(np.abs(delta) > bound + 1e-9):
            raise ActionError(f"trade size exceeds the +/-{bound} bound")
        next_prices = self.price_path[:, self.state.period + 1]
        self.state, info = apply_trades(self.state, delta, self.config, next_prices)
        done = self.state.period >= self.config.horizon
        reward = self.state.wealth() if done else 0.0
        return StepResult(self._observe(), reward, done, info)


def make_mpaa_env(config: MpaaConfig | None = None) -> AssetAllocationEnv:
    return AssetAllocationEnv(config)


# -- fixed plans ----------------------------------------------------------


@dataclass
class TradePlan:
    """Per-period nonnegative buy and sell quantities, never both per entry."""

    buy: np.ndarray  # (horizon, n_assets)
    sell: np.ndarray

    def __post_init__(self) -> None:
        self.buy = np.asarray(self.buy, dtype=float)
        self.sell = np.asarray(self.sell, dtype=float)
        if self.buy.shape != self.sell.shape or self.buy.ndim != 2:
            raise ConfigError("buy and sell grids must share a (horizon, assets) shape")
        if np.any(self.buy < 0) or np.any(self.sell < 0):
            raise ConfigError("plan quantities must be nonnegative")
        if np.any((self.buy > 1e-9) & (self.sell > 1e-9)):
            raise ConfigError("a plan entry cannot buy and sell the same asset")

    def deltas(self) -> np.ndarray:
        return self.buy - self.sell

    @staticmethod
    def from_quantities(buy: np.ndarray, sell: np.ndarray) -> "TradePlan":
        """Net overlapping buy/sell pairs (degenerate LP vertices produce
        both) and snap negligible residue to zero."""
        net = np.asarray(buy, dtype=float) - np.asarray(sell, dtype=float)
        net[np.abs(net) < 1e-9] = 0.0
        return TradePlan(buy=np.maximum(net, 0.0), sell=np.maximum(-net, 0.0))


def deterministic_plan(config: MpaaConfig) -> tuple[TradePlan, float]:
    """LP optimum of the trade dynamics with prices pinned at their means.

    Columns: buys and sells per (period, asset), then cash and holdings per
    period end. Cash balance rows are equalities; slack cash buys nothing.
    """
    n, horizon = config.n_assets, config.horizon
    mean = np.asarray(config.price_mean, dtype=float)
    sale = np.asarray(config.sale_cost)
    purchase = np.asarray(config.purchase_cost)

    def buy_col(l: int, i: int) -> int:
        return l * n + i

    def sell_col(l: int, i: int) -> int:
        return horizon * n + l * n + i

    def cash_col(l: int) -> int:  # cash at the end of period l, l = 1..horizon
        return 2 * horizon * n + (l - 1)

    def hold_col(l: int, i: int) -> int:
        return 2 * horizon * n + horizon + (l - 1) * n + i

    n_cols = 2 * horizon * n + horizon + horizon * n
    lower = np.zeros(n_cols)
    upper = np.full(n_cols, np.inf)
    upper[: 2 * horizon * n] = config.trade_bound

    rows: list[np.ndarray] = []
    senses: list[str] = []
    rhs: list[float] = []
    for l in range(horizon):
        row = np.zeros(n_cols)
        row[cash_col(l + 1)] = 1.0
        rhs_val = 0.0
        if l > 0:
            row[cash_col(l)] = -1.0
        else:
            rhs_val += config.initial_cash
        for i in range(n):
            row[buy_col(l, i)] += (1.0 + purchase[i]) * mean[i, l]
            row[sell_col(l, i)] -= (1.0 - sale[i]) * mean[i, l]
        rows.append(row)
        senses.append(lp.EQ)
        rhs.append(rhs_val)
        for i in range(n):
            row = np.zeros(n_cols)
            row[hold_col(l + 1, i)] = 1.0
            row[buy_col(l, i)] = -1.0
            row[sell_col(l, i)] = 1.0
            rhs_val = 0.0
            if l > 0:
                row[hold_col(l, i)] = -1.0
            else:
                rhs_val += config.initial_holdings[i]
            rows.append(row)
            senses.append(lp.EQ)
            rhs.append(rhs_val)

    c = np.zeros(n_cols)
    c[cash_col(horizon)] = 1.0
    for i in range(n):
        c[hold_col(horizon, i)] = mean[i, horizon]

    problem = lp.LpProblem(
        c=c,
        a=np.array(rows),
        senses=senses,
        b=np.array(rhs),
        lower=lower,
        upper=upper,
        maximize=True,
    )
    solution = lp.solve(problem)
    if solution.status == lp.UNBOUNDED:
        raise ConfigError(
            "mean prices admit a costless arbitrage cycle; the plan is unbounded"
        )
    if not solution.optimal:
        raise ConfigError(f"planning LP failed with status {solution.status}")
    buy = np.array([[solution.x[buy_col(l, i)] for i in range(n)] for l in range(horizon)])
    sell = np.array([[solution.x[sell_col(l, i)] for i in range(n)] for l in range(horizon)])
    return TradePlan.from_quantities(buy, sell), float(solution.objective)


def simulate_plan(
    plan: TradePlan, config: MpaaConfig, price_path: np.ndarray
) -> float:
    """Replay a plan's deltas against one price path; returns final wealth.
    Requests that a path cannot fund are projected like any agent action."""
    price_path = np.asarray(price_path, dtype=float)
    if plan.buy.shape != (config.horizon, config.n_assets):
        raise ConfigError("plan shape must be (horizon, assets)")
    if price_path.shape != (config.n_assets, config.horizon + 1):
        raise ConfigError("price path must cover periods 0..horizon")
    state = initial_portfolio(config, price_path[:, 0])
    deltas = plan.deltas()
    for l in range(config.horizon):
        state, _ = apply_trades(state, deltas[l], config, price_path[:, l + 1])
    return state.wealth()


@dataclass
class WealthStats:
    mean: float
    std: float
    min: float
    histogram_counts: np.ndarray
    histogram_edges: np.ndarray
    wealths: np.ndarray = field(repr=False, default=None)


def sample_price_paths(
    config: MpaaConfig, n_paths: int, stream: RngStream
) -> np.ndarray:
    """Gaussian price grid per path, truncated at the price floor."""
    mean = np.asarray(config.price_mean, dtype=float)
    std = np.asarray(config.price_std, dtype=float)
    rng = stream.split("prices").generator
    draws = rng.normal(mean[None, :, :], std[None, :, :], size=(n_paths, *mean.shape))
    return np.maximum(draws, PRICE_FLOOR)


def evaluate_plan(
    plan: TradePlan,
    config: MpaaConfig,
    n_scenarios: int,
    stream: RngStream,
    bins: int = 20,
) -> WealthStats:
    """Monte Carlo over price paths with the plan held fixed."""
    if n_scenarios < 1:
        raise ConfigError("need at least one scenario")
    paths = sample_price_paths(config, n_scenarios, stream)
    wealths = np.array([simulate_plan(plan, config, path) for path in paths])
    counts, edges = np.histogram(wealths, bins=bins)
    return WealthStats(
        mean=float(wealths.mean()),
        std=float(wealths.std()),
        min=float(wealths.min()),
        histogram_counts=counts,
        histogram_edges=edges,
        wealths=wealths,
    )


# -- files ------------------------------------------------------------------


def save_plan(plan: TradePlan, path: str | Path) -> None:
    """CSV rows `period,asset,buy,sell`, one per (period, asset)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["period", "asset", "buy", "sell"])
        for l in range(plan.buy.shape[0]):
            for i in range(plan.buy.shape[1]):
                writer.writerow([l, i, repr(float(plan.buy[l, i])), repr(float(plan.sell[l, i]))])


def load_plan(path: str | Path) -> TradePlan:
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["period", "asset", "buy", "sell"]:
            raise ConfigError(f"unexpected plan header: {reader.fieldnames}")
        for row in reader:
            entries[(int(row["period"]), int(row["asset"]))] = (
                float(row["buy"]),
                float(row["sell"]),
            )
    if not entries:
        raise ConfigError("plan file holds no rows")
    horizon = max(l for l, _ in entries) + 1
    n = max(i for _, i in entries) + 1
    buy = np.zeros((horizon, n))
    sell = np.zeros((horizon, n))
    for (l, i), (b, s) in entries.items():
        buy[l, i] = b
        sell[l, i] = s
    return TradePlan(buy=buy, sell=sell)


def save_config(config: MpaaConfig, path: str | Path) -> None:
    data = {
        name: getattr(config, name) for name in MpaaConfig.__dataclass_fields__
    }
    data = {
        k: (list(list(r) for r in v) if k in ("price_mean", "price_std") else
            list(v) if isinstance(v, tuple) else v)
        for k, v in data.items()
    }
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def load_config(path: str | Path) -> MpaaConfig:
    data = json.loads(Path(path).read_text())
    known = set(MpaaConfig.__dataclass_fields__)
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
    for key in ("initial_holdings", "sale_cost", "purchase_cost", "price_base"):
        if key in data:
            data[key] = tuple(data[key])
    for key in ("price_mean", "price_std"):
        if key in data:
            data[key] = tuple(tuple(row) for row in data[key])
    return MpaaConfig(**data)
