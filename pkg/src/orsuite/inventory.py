"""Multi-stage production/inventory chain with lead times and capacities.

Stages are numbered 0 (retailer) to M (raw supply). Stages 0..M-1 hold
inventory and place replenishment orders upstream each period; stage M has
unlimited material. Per period and stage the profit is

    discount^t * (price*shipped - cost*reorder - penalty*unfulfilled
                  - holding*end_inventory)

and the environment reward is the sum over stages. The backlog variant rolls
unmet retail demand into the next period's demand; the lost-sales variant
penalizes it once and drops it.

Observation layout: on-hand inventory per stage (M entries), then the last
max(lead_time) action vectors, newest first, zero-padded at reset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import (
    ActionError,
    BoxSpace,
    ConfigError,
    Environment,
    Observation,
    RngStream,
    StepResult,
)


@dataclass(frozen=True)
class SupplyChainConfig:
    """Stage-indexed parameters; defaults are the benchmark four-stage chain."""

    sales_price: tuple = (2.0, 1.5, 1.0, 0.75)
    purchase_cost: tuple = (1.5, 1.0, 0.75, 0.5)
    unfulfilled_penalty: tuple = (0.10, 0.075, 0.05, 0.025)
    holding_cost: tuple = (0.15, 0.10, 0.05)
    capacity: tuple = (100.0, 90.0, 80.0)
    lead_time: tuple = (3, 5, 10)
    initial_inventory: tuple = (100.0, 100.0, 200.0)
    periods: int = 30
    discount: float = 0.97
    demand_mean: float = 20.0
    backlog: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        stages = len(self.sales_price)
        if stages < 2:
            raise ConfigError("need at least a retailer and a supply stage")
        m = stages - 1
        if len(self.purchase_cost) != stages or len(self.unfulfilled_penalty) != stages:
            raise ConfigError("purchase_cost and unfulfilled_penalty must cover every stage")
        for name, arr in (
            ("holding_cost", self.holding_cost),
            ("capacity", self.capacity),
            ("lead_time", self.lead_time),
            ("initial_inventory", self.initial_inventory),
        ):
            if len(arr) != m:
                raise ConfigError(f"{name} must have one entry per ordering stage ({m})")
        if self.periods < 1:
            raise ConfigError("periods must be positive")
        if not (0.0 < self.discount <= 1.0):
            raise ConfigError("discount must lie in (0, 1]")
        if any(l < 0 for l in self.lead_time):
            raise ConfigError("lead times must be nonnegative")
        if any(c <= 0 for c in self.capacity):
            raise ConfigError("capacities must be positive")
        if any(i < 0 for i in self.initial_inventory):
            raise ConfigError("initial inventory must be nonnegative")
        if self.demand_mean < 0:
            raise ConfigError("demand_mean must be nonnegative")

    @property
    def stages(self) -> int:
        return len(self.sales_price)

    @property
    def ordering_stages(self) -> int:
        """Number of stages that hold inventory and place orders (0..M-1)."""
        return self.stages - 1


@dataclass
class ChainState:
    period: int
    on_hand: np.ndarray  # per ordering stage
    pipeline: list  # per ordering stage: list of [qty, due_period]
    backlog: np.ndarray  # per stage, the stage's own unfulfilled outbound

    def pipeline_total(self, m: int) -> float:
        return float(sum(q for q, _ in self.pipeline[m]))

    def copy(self) -> "ChainState":
        return ChainState(
            period=self.period,
            on_hand=self.on_hand.copy(),
            pipeline=[[list(e) for e in q] for q in self.pipeline],
            backlog=self.backlog.copy(),
        )


def initial_state(config: SupplyChainConfig) -> ChainState:
    m = config.ordering_stages
    return ChainState(
        period=0,
        on_hand=np.array(config.initial_inventory, dtype=float),
        pipeline=[[] for _ in range(m)],
        backlog=np.zeros(config.stages),
    )


def transition(
    state: ChainState,
    requested: np.ndarray,
    demand: float,
    config: SupplyChainConfig,
) -> tuple[ChainState, np.ndarray]:
    """One period of chain dynamics; pure, returns (new state, stage profits).

    Event order per period: orders are placed and accepted against upstream
    pre-arrival stock, pipeline arrivals land, the retailer sells against
    demand (plus backlog in the backlog variant), shortfalls are penalized,
    holding cost is charged on end-of-period inventory.
    """
    m_stages = config.ordering_stages
    requested = np.asarray(requested, dtype=float)
    if requested.shape != (m_stages,):
        raise ConfigError(f"requested vector must have length {m_stages}")
    if np.any(requested < 0):
        raise ConfigError("reorder requests must be nonnegative")
    t = state.period
    new = state.copy()

    # accepted reorders: capped by supplier capacity and pre-arrival stock
    accepted = np.minimum(requested, np.asarray(config.capacity, dtype=float))
    for m in range(m_stages - 1):
        accepted[m] = min(accepted[m], state.on_hand[m + 1])

    # pipeline arrivals due this period; a zero lead time lands immediately
    arrivals = np.zeros(m_stages)
    for m in range(m_stages):
        due_now = [e for e in new.pipeline[m] if e[1] <= t]
        arrivals[m] = sum(q for q, _ in due_now)
        new.pipeline[m] = [e for e in new.pipeline[m] if e[1] > t]
        lead = config.lead_time[m]
        if lead == 0:
            arrivals[m] += accepted[m]
        elif accepted[m] > 0:
            new.pipeline[m].append([float(accepted[m]), t + lead])

    # shipments: retailer sells, upstream stages ship what was accepted
    prev_b0 = state.backlog[0] if config.backlog else 0.0
    owed = demand + prev_b0
    shipped = np.zeros(config.stages)
    shipped[0] = min(state.on_hand[0] + arrivals[0], owed)
    for m in range(1, config.stages):
        shipped[m] = accepted[m - 1]

    unfulfilled = np.zeros(config.stages)
    unfulfilled[0] = owed - shipped[0]
    for m in range(1, config.stages):
        unfulfilled[m] = requested[m - 1] - shipped[m]

    for m in range(m_stages):
        new.on_hand[m] = state.on_hand[m] + arrivals[m] - shipped[m]

    new.backlog = unfulfilled.copy() if config.backlog else np.zeros(config.stages)
    new.period = t + 1

    price = np.asarray(config.sales_price)
    cost = np.asarray(config.purchase_cost)
    penalty = np.asarray(config.unfulfilled_penalty)
    disc = config.discount**t
    profits = np.zeros(config.stages)
    for m in range(m_stages):
        profits[m] = disc * (
            price[m] * shipped[m]
            - cost[m] * accepted[m]
            - penalty[m] * unfulfilled[m]
            - config.holding_cost[m] * new.on_hand[m]
        )
    top = config.stages - 1
    # the raw stage produces exactly what it ships, at the raw material cost
    profits[top] = disc * (
        price[top] * shipped[top]
        - cost[top] * shipped[top]
        - penalty[top] * unfulfilled[top]
    )
    return new, profits


def base_stock_requests(
    state: ChainState, levels: np.ndarray, config: SupplyChainConfig
) -> np.ndarray:
    """Order-up-to rule: request the gap between the stage's target level and
    its echelon inventory position (on hand + in transit - backlog, summed
    over the stage and everything downstream), clipped to capacity."""
    m_stages = config.ordering_stages
    levels = np.asarray(levels, dtype=float)
    if levels.shape != (m_stages,):
        raise ConfigError(f"levels must have length {m_stages}")
    requests = np.zeros(m_stages)
    position = 0.0
    for m in range(m_stages):
        position += (
            float(state.on_hand[m]) + state.pipeline_total(m) - float(state.backlog[m])
        )
        requests[m] = min(max(levels[m] - position, 0.0), config.capacity[m])
    return requests


def levels_from_increments(x: np.ndarray) -> np.ndarray:
    """Base-stock targets are cumulative sums of nonnegative increments, which
    keeps them ordered z_0 <= z_1 <= ... during optimization."""
    x = np.asarray(x, dtype=float)
    if np.any(x < -1e-9):
        raise ConfigError("level increments must be nonnegative")
    return np.cumsum(np.maximum(x, 0.0))


def sample_demand_paths(
    config: SupplyChainConfig, n_paths: int, stream: RngStream
) -> np.ndarray:
    """Poisson demand, one row per path."""
    rng = stream.split("demand-paths").generator
    return rng.poisson(config.demand_mean, size=(n_paths, config.periods)).astype(float)


class InventoryChainEnv(Environment):
    """Chain as an episode: the action is the integer reorder-request vector
    for stages 0..M-1, bounded per stage by the supplier capacity."""

    def __init__(self, config: SupplyChainConfig | None = None) -> None:
        config = config or SupplyChainConfig()
        super().__init__(config.seed)
        self.config = config
        m = config.ordering_stages
        self.action_space = BoxSpace(0.0, float(max(config.capacity)), m)
        self._history_len = max(config.lead_time) if max(config.lead_time) > 0 else 1
        self.observation_size = m + self._history_len * m
        self.max_steps = config.periods
        self.state = initial_state(config)
        self.demand_path = np.zeros(config.periods)
        self._history = np.zeros((self._history_len, m))

    def _observe(self) -> Observation:
        vals = np.concatenate([self.state.on_hand, self._history.ravel()])
        return Observation(values=vals.astype(float))

    def _reset(self, stream: RngStream) -> Observation:
        self.state = initial_state(self.config)
        self.demand_path = (
            stream.split("demand").generator
            .poisson(self.config.demand_mean, size=self.config.periods)
            .astype(float)
        )
        self._history = np.zeros_like(self._history)
        return self._observe()

    def _step(self, action) -> StepResult:
        request = np.asarray(action, dtype=float)
        for m, value in enumerate(request):
            if abs(value - round(value)) > 1e-9:
                raise ActionError(f"reorder for stage {m} must be an integer, got {value}")
            if value < 0 or value > self.config.capacity[m]:
                raise ActionError(
                    f"reorder for stage {m} must lie in [0, {self.config.capacity[m]}]"
                )
        request = np.round(request)
        demand = float(self.demand_path[self.state.period])
        self.state, profits = transition(self.state, request, demand, self.config)
        self._history = np.roll(self._history, 1, axis=0)
        self._history[0] = request
        done = self.state.period >= self.config.periods
        return StepResult(
            observation=self._observe(),
            reward=float(profits.sum()),
            done=done,
            info={"demand": demand, "retail_backlog": float(self.state.backlog[0])},
        )


class BaseStockPolicy:
    """Environment-coupled baseline: reads the env's exact chain state."""

    def __init__(self, env: InventoryChainEnv, levels: np.ndarray) -> None:
        self.env = env
        self.levels = np.asarray(levels, dtype=float)

    def __call__(self, obs: Observation) -> np.ndarray:
        return np.round(base_stock_requests(self.env.state, self.levels, self.env.config))


# -- flat key=value config files ----------------------------------------

_LIST_FIELDS = {
    "sales_price",
    "purchase_cost",
    "unfulfilled_penalty",
    "holding_cost",
    "capacity",
    "lead_time",
    "initial_inventory",
}
_INT_FIELDS = {"periods", "seed"}
_BOOL_FIELDS = {"backlog"}


def save_config(config: SupplyChainConfig, path: str | Path) -> None:
    """Flat `key = value` lines; lists are comma-separated."""
    lines = []
    for name in SupplyChainConfig.__dataclass_fields__:
        value = getattr(config, name)
        if name in _LIST_FIELDS:
            text = ", ".join(repr(float(v)) if name != "lead_time" else str(int(v)) for v in value)
        elif name in _BOOL_FIELDS:
            text = "true" if value else "false"
        else:
            text = repr(value)
        lines.append(f"{name} = {text}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_config(path: str | Path) -> SupplyChainConfig:
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"bad config line: {raw!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        text = text.strip()
        if key not in SupplyChainConfig.__dataclass_fields__:
            raise ConfigError(f"unknown config key {key!r}")
        if key in _LIST_FIELDS:
            parts = [p.strip() for p in text.split(",") if p.strip()]
            if key == "lead_time":
                values[key] = tuple(int(p) for p in parts)
            else:
                values[key] = tuple(float(p) for p in parts)
        elif key in _INT_FIELDS:
            values[key] = int(text)
        elif key in _BOOL_FIELDS:
            values[key] = text.lower() in ("true", "1", "yes")
        else:
            values[key] = float(text)
    return SupplyChainConfig(**values)


def save_demand_paths(paths: np.ndarray, path: str | Path) -> None:
    """One CSV row per sample path."""
    arr = np.atleast_2d(np.asarray(paths))
    lines = [",".join(str(int(v)) if float(v).is_integer() else repr(float(v)) for v in row)
             for row in arr]
    Path(path).write_text("\n".join(lines) + "\n")


def load_demand_paths(path: str | Path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().strip().splitlines():
        rows.append([float(v) for v in line.split(",")])
    return np.array(rows)
