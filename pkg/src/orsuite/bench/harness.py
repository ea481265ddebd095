"""Paired benchmark runner: every method sees the same seeded episodes.

Episode seeds are drawn once from the benchmark seed, so adding or removing
a method never changes what any other method is evaluated on. Reference
methods (exact DP, perfect-information plans) replay their solutions through
the real dynamics, which keeps every reported mean auditable from
trajectories.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from ..assets import AssetAllocationEnv, deterministic_plan
from ..core import ConfigError, Environment, Observation, RngStream, run_episode
from ..inventory import BaseStockPolicy, InventoryChainEnv
from ..inventory_opt import ShlpPolicy, optimize_base_stock, oracle_value, simulate_plan
from ..knapsack import (
    GreedyPolicy,
    KnapsackInstance,
    OfflineKnapsackEnv,
    OnlineKnapsackEnv,
    TwoBinsPolicy,
    solve_exact_dp,
)
from ..registry import KnapsackEnvConfig, knapsack_instance, make_config, resolve
from ..vmpacking import FirstFitPolicy, RandomPlacementPolicy, VmPackingEnv

RATIO_TOL = 1e-9


@dataclass
class MethodResult:
    method: str
    mean: float
    std: float
    ratio: float
    seconds: float
    totals: np.ndarray | None = field(default=None, compare=False, repr=False)


@dataclass
class BenchmarkReport:
    env_id: str
    episodes: int
    seed: int
    results: list  # MethodResult, reference first

    @property
    def reference(self) -> str:
        return self.results[0].method


def episode_seeds(seed: int, env_id: str, episodes: int) -> np.ndarray:
    """The shared episode seed set for one (benchmark seed, env) pair."""
    stream = RngStream(seed, f"bench/{env_id}")
    return stream.split("episodes").generator.integers(0, 2**62, size=episodes)


def performance_ratio(reference_mean: float, method_mean: float) -> float:
    """Table-style ratio: reference/method when rewards are positive,
    |method|/|reference| when the frame is cost-like (negative means)."""
    if reference_mean >= 0.0:
        if method_mean <= 0.0:
            return float("inf")
        raw = reference_mean / method_mean
    else:
        raw = abs(method_mean) / abs(reference_mean)
    if 1.0 - RATIO_TOL <= raw < 1.0:
        return 1.0  # numerical fuzz only; genuine sub-1 ratios stay visible
    return raw


# -- per-family method implementations ------------------------------------


class _DpReplayPolicy:
    """Plays the exact DP solution of the env's instance, one copy per step."""

    def __init__(self, env: OfflineKnapsackEnv) -> None:
        self.env = env
        self.picks: list[int] = []

    def begin_episode(self, stream: RngStream) -> None:
        _, counts = solve_exact_dp(self.env.instance)
        self.picks = [i for i, c in enumerate(counts) for _ in range(int(c))]
        self.picks.reverse()  # pop from the end

    def __call__(self, obs: Observation) -> int:
        return self.picks.pop() if self.picks else 0


class _MaskUniformPolicy:
    """Uniform choice over the observation mask; 0 when nothing is allowed."""

    def __init__(self) -> None:
        self._rng = np.random.default_rng(0)

    def begin_episode(self, stream: RngStream) -> None:
        self._rng = stream.split("choice").generator

    def __call__(self, obs: Observation) -> int:
        allowed = np.flatnonzero(obs.mask)
        if allowed.size == 0:
            return 0
        return int(self._rng.choice(allowed))


class _OkpOraclePolicy:
    """Best hindsight accept/reject schedule for the episode's realized draws."""

    def __init__(self, env: OnlineKnapsackEnv) -> None:
        self.env = env
        self.accepts: list[bool] = []

    def begin_episode(self, stream: RngStream) -> None:
        drawn = np.asarray(self.env.draw_sequence, dtype=int)
        inst = self.env.instance
        sub = KnapsackInstance(
            values=inst.values[drawn],
            weights=inst.weights[drawn],
            counts=np.ones(drawn.size, dtype=int),
            capacity=inst.capacity,
        )
        _, chosen = solve_exact_dp(sub)
        self.accepts = [bool(c) for c in chosen]
        self.accepts.reverse()

    def __call__(self, obs: Observation) -> int:
        return 1 if self.accepts and self.accepts.pop() else 0


class _PlanReplayPolicy:
    """Replays a fixed trade plan through the portfolio env period by period."""

    def __init__(self, env: AssetAllocationEnv, deltas: np.ndarray) -> None:
        self.env = env
        self.deltas = deltas

    def __call__(self, obs: Observation) -> np.ndarray:
        return self.deltas[self.env.state.period]


def _episode_totals(env: Environment, policy, seeds: np.ndarray) -> np.ndarray:
    return np.array(
        [run_episode(env, policy, int(s)).total_reward for s in seeds]
    )


def _offline_knapsack_totals(
    config: KnapsackEnvConfig, variant: str, method: str, seeds: np.ndarray
) -> np.ndarray:
    totals = np.zeros(len(seeds))
    for j, s in enumerate(seeds):
        env = OfflineKnapsackEnv(
            knapsack_instance(replace(config, seed=int(s)), variant), seed=int(s)
        )
        if method == "dp":
            policy = _DpReplayPolicy(env)
        elif method == "greedy":
            policy = GreedyPolicy(env.instance)
        else:
            policy = _MaskUniformPolicy()
        totals[j] = run_episode(env, policy, int(s)).total_reward
    return totals


def _inventory_totals(config, method: str, seeds: np.ndarray) -> np.ndarray:
    env = InventoryChainEnv(config)
    if method == "oracle":
        totals = np.zeros(len(seeds))
        for j, s in enumerate(seeds):
            env.reset(seed=int(s))
            plan = oracle_value(env.demand_path, config).plan
            totals[j] = simulate_plan(plan, env.demand_path, config)
        return totals
    if method == "shlp":
        return _episode_totals(env, ShlpPolicy(env), seeds)
    if method == "dfo":
        fit = optimize_base_stock(config, n_paths=4, seed=config.seed)
        return _episode_totals(env, BaseStockPolicy(env, fit.levels), seeds)
    m = config.ordering_stages
    return _episode_totals(env, lambda obs: np.zeros(m), seeds)


def _assets_totals(config, method: str, seeds: np.ndarray) -> np.ndarray:
    env = AssetAllocationEnv(config)
    if method == "plan":
        plan, _ = deterministic_plan(config)
        policy = _PlanReplayPolicy(env, plan.deltas())
    else:
        policy = lambda obs: np.zeros(config.n_assets)
    return _episode_totals(env, policy, seeds)


_FAMILY_METHODS = {
    "knapsack-binary": ("dp", "greedy", "random"),
    "knapsack-bounded": ("dp", "greedy", "random"),
    "knapsack-online": ("oracle", "twobins"),
    "vm-packing": ("firstfit", "random"),
    "vm-packing-unmasked": ("firstfit", "random"),
    "inventory-backlog": ("oracle", "shlp", "dfo", "zero"),
    "inventory-lost-sales": ("oracle", "shlp", "dfo", "zero"),
    "asset-allocation": ("plan", "no-trade"),
}


def available_methods(env_id: str) -> tuple:
    """Methods runnable on an env id; the first is the reference."""
    canonical = resolve(env_id).env_id
    return _FAMILY_METHODS[canonical]


def _method_totals(env_id: str, config, method: str, seeds: np.ndarray) -> np.ndarray:
    if env_id in ("knapsack-binary", "knapsack-bounded"):
        variant = "binary" if env_id == "knapsack-binary" else "bounded"
        return _offline_knapsack_totals(config, variant, method, seeds)
    if env_id == "knapsack-online":
        env = OnlineKnapsackEnv(
            knapsack_instance(config, "binary"),
            draw_count=config.draw_count,
            seed=config.seed,
        )
        policy = _OkpOraclePolicy(env) if method == "oracle" else TwoBinsPolicy()
        return _episode_totals(env, policy, seeds)
    if env_id in ("vm-packing", "vm-packing-unmasked"):
        env = VmPackingEnv(config, masked=env_id == "vm-packing")
        if method == "firstfit":
            policy = FirstFitPolicy(config.pm_count)
        else:
            policy = RandomPlacementPolicy()
        return _episode_totals(env, policy, seeds)
    if env_id in ("inventory-backlog", "inventory-lost-sales"):
        return _inventory_totals(config, method, seeds)
    return _assets_totals(config, method, seeds)


def run_benchmark(
    env_id: str,
    methods: list[str] | None = None,
    episodes: int = 100,
    seed: int = 0,
    overrides: dict | None = None,
) -> BenchmarkReport:
    """Evaluate methods on one environment over a shared episode set.

    The family's reference method is always included (prepended when absent)
    because ratios are defined against it.
    """
    canonical = resolve(env_id).env_id
    valid = available_methods(canonical)
    reference = valid[0]
    methods = list(methods) if methods else list(valid)
    for m in methods:
        if m not in valid:
            raise ConfigError(
                f"unknown method {m!r} for {env_id!r}; valid methods: {', '.join(valid)}"
            )
    if reference not in methods:
        methods.insert(0, reference)
    else:
        methods.sort(key=lambda m: m != reference)  # reference first, order kept
    if episodes < 1:
        raise ConfigError("episodes must be positive")

    config = make_config(canonical, overrides)
    seeds = episode_seeds(seed, canonical, episodes)

    results = []
    for method in methods:
        start = time.perf_counter()
        totals = _method_totals(canonical, config, method, seeds)
        elapsed = time.perf_counter() - start
        results.append(
            MethodResult(
                method=method,
                mean=float(totals.mean()),
                std=float(totals.std()),
                ratio=0.0,  # filled below once the reference mean is known
                seconds=elapsed,
                totals=totals,
            )
        )
    ref_mean = results[0].mean
    for r in results:
        r.ratio = 1.0 if r.method == reference else performance_ratio(ref_mean, r.mean)
    return BenchmarkReport(
        env_id=canonical, episodes=episodes, seed=seed, results=results
    )
