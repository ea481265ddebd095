"""Knapsack environments and baselines.

Three variants share one instance type: binary selection (one copy per item),
bounded selection (up to N_i copies), and an online variant where items are
drawn one at a time and must be taken or passed on the spot.

Offline observation layout: item values (n), item weights (n), remaining
counts (n), then current load and capacity. Online layout: current item value
and weight, then load and capacity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    ActionError,
    ConfigError,
    DiscreteSpace,
    Environment,
    Observation,
    RngStream,
    StepResult,
)

STOP = -1


@dataclass(frozen=True)
class KnapsackInstance:
    """Item values/weights/copy-counts plus integer capacity."""

    values: np.ndarray
    weights: np.ndarray
    counts: np.ndarray
    capacity: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=int))
        object.__setattr__(self, "counts", np.asarray(self.counts, dtype=int))
        n = self.values.shape[0]
        if self.weights.shape[0] != n or self.counts.shape[0] != n:
            raise ConfigError("values, weights and counts must have equal length")
        if n == 0:
            raise ConfigError("instance needs at least one item")
        if np.any(self.values <= 0):
            raise ConfigError("item values must be positive")
        if np.any(self.weights <= 0):
            raise ConfigError("item weights must be positive integers")
        if np.any(self.counts < 1):
            raise ConfigError("item counts must be at least 1")
        if self.capacity < 0:
            raise ConfigError("capacity must be nonnegative")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def generate_instance(
    variant: str,
    stream: RngStream,
    n_items: int = 200,
    capacity: int = 200,
    value_range: tuple[int, int] = (1, 100),
    weight_range: tuple[int, int] = (1, 100),
    count_range: tuple[int, int] = (1, 10),
) -> KnapsackInstance:
    """Default instance generator; `variant` is "binary" or "bounded"."""
    if variant not in ("binary", "bounded"):
        raise ConfigError(f"unknown knapsack variant {variant!r}")
    rng = stream.generator
    values = rng.integers(value_range[0], value_range[1] + 1, size=n_items).astype(float)
    weights = rng.integers(weight_range[0], weight_range[1] + 1, size=n_items)
    if variant == "bounded":
        counts = rng.integers(count_range[0], count_range[1] + 1, size=n_items)
    else:
        counts = np.ones(n_items, dtype=int)
    return KnapsackInstance(values=values, weights=weights, counts=counts, capacity=capacity)


def save_instance(instance: KnapsackInstance, path: str | Path) -> None:
    """Text format: header "W n", then one "value weight count" line per item."""
    lines = [f"{instance.capacity} {instance.n}"]
    for v, w, c in zip(instance.values, instance.weights, instance.counts):
        lines.append(f"{float(v)!r} {int(w)} {int(c)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_instance(path: str | Path) -> KnapsackInstance:
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise ConfigError(f"empty instance file {path}")
    head = text[0].split()
    if len(head) != 2:
        raise ConfigError("instance header must be 'capacity n_items'")
    capacity, n = int(head[0]), int(head[1])
    if len(text) - 1 != n:
        raise ConfigError(f"expected {n} item lines, found {len(text) - 1}")
    values, weights, counts = [], [], []
    for line in text[1:]:
        v, w, c = line.split()
        values.append(float(v))
        weights.append(int(w))
        counts.append(int(c))
    return KnapsackInstance(values=values, weights=weights, counts=counts, capacity=capacity)


def greedy_action(
    values: np.ndarray,
    weights: np.ndarray,
    remaining: np.ndarray,
    load: int,
    capacity: int,
) -> int:
    """Highest value/weight ratio among items that still fit; STOP when none.

    Ties go to the lower item index, which keeps traces reproducible.
    """
    fits = (remaining > 0) & (load + weights <= capacity)
    if not np.any(fits):
        return STOP
    ratios = np.where(fits, values / weights, -np.inf)
    return int(np.argmax(ratios))


def twobins_decision(r: int, load: int, capacity: int, seen_sum: int, weight: int) -> int:
    """One online accept/reject decision.

    r=1: take anything that fits. r=0: pass while the running sum of seen item
    weights (current item included) is at most the capacity, afterwards take
    whatever fits.
    """
    fits = load + weight <= capacity
    if r == 1:
        return 1 if fits else 0
    if seen_sum <= capacity:
        return 0
    return 1 if fits else 0


def solve_exact_dp(instance: KnapsackInstance) -> tuple[float, np.ndarray]:
    """Exact pseudo-polynomial DP over integer capacity, with reconstruction.

    Returns (optimal value, copies-per-item vector).
    """
    w_cap = instance.capacity
    n = instance.n
    dp = np.zeros(w_cap + 1)
    take = np.zeros((n, w_cap + 1), dtype=np.int32)
    for i in range(n):
        w = int(instance.weights[i])
        v = float(instance.values[i])
        kmax = min(int(instance.counts[i]), w_cap // w)
        if kmax == 0:
            continue
        cand = np.full((kmax + 1, w_cap + 1), -np.inf)
        cand[0] = dp
        for k in range(1, kmax + 1):
            kw = k * w
            cand[k, kw:] = dp[: w_cap + 1 - kw] + k * v
        best_k = np.argmax(cand, axis=0)
        dp = cand[best_k, np.arange(w_cap + 1)]
        take[i] = best_k
    chosen = np.zeros(n, dtype=int)
    c = w_cap
    for i in range(n - 1, -1, -1):
        k = int(take[i, c])
        chosen[i] = k
        c -= k * int(instance.weights[i])
    return float(dp[w_cap]), chosen


def okp_offline_oracle(instance: KnapsackInstance, drawn: np.ndarray) -> float:
    """Best-possible value over a realized draw sequence: each drawn item is a
    one-copy item in an ordinary binary knapsack."""
    drawn = np.asarray(drawn, dtype=int)
    if drawn.size == 0:
        return 0.0
    sub = KnapsackInstance(
        values=instance.values[drawn],
        weights=instance.weights[drawn],
        counts=np.ones(drawn.size, dtype=int),
        capacity=instance.capacity,
    )
    value, _ = solve_exact_dp(sub)
    return value


class OfflineKnapsackEnv(Environment):
    """Binary/bounded knapsack as an episode: pick item indices until full.

    Invalid picks (exhausted count or does not fit) are no-ops worth 0 and do
    not end the episode; the episode ends once nothing fits anywhere, or at
    the declared step cap.
    """

    def __init__(self, instance: KnapsackInstance, seed: int = 0) -> None:
        super().__init__(seed)
        self.instance = instance
        self.action_space = DiscreteSpace(instance.n)
        self.observation_size = 3 * instance.n + 2
        self.max_steps = instance.n + instance.capacity
        self.remaining = instance.counts.copy()
        self.load = 0

    def _mask(self) -> np.ndarray:
        return (self.remaining > 0) & (self.load + self.instance.weights <= self.instance.capacity)

    def _observe(self) -> Observation:
        inst = self.instance
        vals = np.concatenate(
            [inst.values, inst.weights, self.remaining, [self.load, inst.capacity]]
        ).astype(float)
        return Observation(values=vals, mask=self._mask())

    def _reset(self, stream: RngStream) -> Observation:
        self.remaining = self.instance.counts.copy()
        self.load = 0
        return self._observe()

    def _step(self, action) -> StepResult:
        i = int(action)
        w = int(self.instance.weights[i])
        reward = 0.0
        valid = self.remaining[i] > 0 and self.load + w <= self.instance.capacity
        if valid:
            self.remaining[i] -= 1
            self.load += w
            reward = float(self.instance.values[i])
        obs = self._observe()
        done = not bool(np.any(obs.mask))
        return StepResult(observation=obs, reward=reward, done=done,
                          info={"valid": float(valid), "load": float(self.load)})


class OnlineKnapsackEnv(Environment):
    """Items are revealed one at a time; action 1 accepts, 0 passes.

    The whole draw sequence is presampled at reset from the episode stream, so
    a finished episode's draws can be replayed for offline comparison via
    `draw_sequence`.
    """

    def __init__(
        self,
        instance: KnapsackInstance,
        draw_count: int = 50,
        probabilities: np.ndarray | None = None,
        seed: int = 0,
    ) -> None:
        super().__init__(seed)
        self.instance = instance
        if probabilities is None:
            probabilities = np.full(instance.n, 1.0 / instance.n)
        probabilities = np.asarray(probabilities, dtype=float)
        if probabilities.shape[0] != instance.n:
            raise ConfigError("probability vector length must match item count")
        if np.any(probabilities < 0) or abs(probabilities.sum() - 1.0) > 1e-9:
            raise ConfigError("item probabilities must be nonnegative and sum to 1")
        self.probabilities = probabilities
        self.draw_count = int(draw_count)
        if self.draw_count < 1:
            raise ConfigError("draw_count must be at least 1")
        self.action_space = DiscreteSpace(2)
        self.observation_size = 4
        self.max_steps = self.draw_count
        self._min_weight = int(np.min(instance.weights[probabilities > 0]))
        self.draw_sequence = np.zeros(self.draw_count, dtype=int)
        self.load = 0
        self._cursor = 0

    def _observe(self) -> Observation:
        i = self.draw_sequence[min(self._cursor, self.draw_count - 1)]
        inst = self.instance
        fits = self.load + int(inst.weights[i]) <= inst.capacity
        vals = np.array(
            [inst.values[i], inst.weights[i], self.load, inst.capacity], dtype=float
        )
        return Observation(values=vals, mask=np.array([True, fits]))

    def _reset(self, stream: RngStream) -> Observation:
        rng = stream.split("items").generator
        self.draw_sequence = rng.choice(
            self.instance.n, size=self.draw_count, p=self.probabilities
        )
        self.load = 0
        self._cursor = 0
        return self._observe()

    def _step(self, action) -> StepResult:
        i = int(self.draw_sequence[self._cursor])
        w = int(self.instance.weights[i])
        reward = 0.0
        accepted = False
        if int(action) == 1 and self.load + w <= self.instance.capacity:
            self.load += w
            reward = float(self.instance.values[i])
            accepted = True
        self._cursor += 1
        exhausted = self._cursor >= self.draw_count
        # no future draw can ever fit once load + lightest possible item > W
        hopeless = self.load + self._min_weight > self.instance.capacity
        done = exhausted or hopeless
        return StepResult(
            observation=self._observe(),
            reward=reward,
            done=done,
            info={"accepted": float(accepted), "item": float(i), "load": float(self.load)},
        )


class GreedyPolicy:
    """Density-greedy baseline for the offline envs; reads the observation."""

    def __init__(self, instance: KnapsackInstance) -> None:
        self.instance = instance

    def __call__(self, obs: Observation) -> int:
        n = self.instance.n
        remaining = obs.values[2 * n : 3 * n].astype(int)
        load = int(obs.values[3 * n])
        action = greedy_action(
            self.instance.values, self.instance.weights, remaining, load,
            self.instance.capacity,
        )
        # STOP only happens when the mask is all false, where any action is a
        # terminal no-op; 0 keeps the action inside the space
        return 0 if action == STOP else action


class TwoBinsPolicy:
    """Per-episode coin flip between take-everything and skip-then-take."""

    def __init__(self) -> None:
        self.r = 1
        self.seen_sum = 0

    def begin_episode(self, stream: RngStream) -> None:
        self.r = int(stream.split("twobins").generator.integers(0, 2))
        self.seen_sum = 0

    def __call__(self, obs: Observation) -> int:
        _, weight, load, capacity = obs.values
        self.seen_sum += int(weight)
        return twobins_decision(
            self.r, int(load), int(capacity), self.seen_sum, int(weight)
        )
