"""Cross-entropy training of a linear policy, as a learning-loop demo.

The policy scores actions with one affine map of the observation: discrete
envs take a mask-aware argmax over scores, box envs clip the score vector to
the action bounds. CEM keeps a Gaussian over the flattened weights, samples a
population, and refits to the elite slice; every candidate is scored on the
same fixed episode seeds so iterations are comparable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ConfigError, Environment, Observation, RngStream, run_episode
from ..inventory import SupplyChainConfig
from ..registry import make_env, resolve

_STD_FLOOR = 0.02  # keeps exploration alive in late iterations


@dataclass
class LinearPolicy:
    """Affine observation-to-score map with space-aware action selection."""

    weights: np.ndarray  # (n_actions or action_dim, obs_size + 1)
    kind: str  # "discrete" or "box"
    low: float | np.ndarray = 0.0
    high: float | np.ndarray = 0.0  # arrays allow per-dimension caps
    integer: bool = False  # round box actions (integer-quantity envs)

    def __call__(self, obs: Observation):
        scores = self.weights @ np.append(obs.values, 1.0)
        if self.kind == "discrete":
            if obs.mask is not None:
                if not np.any(obs.mask):
                    return 0
                scores = np.where(obs.mask, scores, -np.inf)
            return int(np.argmax(scores))
        action = np.clip(scores, self.low, self.high)
        return np.round(action) if self.integer else action


def _policy_shape(env: Environment) -> tuple[int, int]:
    space = env.action_space
    rows = space.n if hasattr(space, "n") else space.size
    return rows, env.observation_size + 1


def _policy_from(
    weights: np.ndarray, env: Environment, integer: bool, high=None
) -> LinearPolicy:
    space = env.action_space
    if hasattr(space, "n"):
        return LinearPolicy(weights=weights, kind="discrete")
    return LinearPolicy(
        weights=weights,
        kind="box",
        low=space.low,
        high=space.high if high is None else high,
        integer=integer,
    )


def cem_train(
    env_id: str,
    iterations: int = 50,
    population: int = 64,
    elite_frac: float = 0.2,
    seed: int = 0,
    overrides: dict | None = None,
    eval_episodes: int = 4,
) -> tuple[LinearPolicy, np.ndarray]:
    """Returns (trained policy, learning curve).

    The curve has iterations + 1 entries: entry 0 is the initial mean
    policy's score, entry i the elite mean of iteration i. Fully determined
    by the seed.
    """
    if not (0.0 < elite_frac <= 1.0):
        raise ConfigError("elite fraction must lie in (0, 1]")
    n_elite = int(np.floor(population * elite_frac))
    if n_elite < 2:
        raise ConfigError(
            f"population {population} with elite fraction {elite_frac} keeps "
            f"{n_elite} elites; need at least 2"
        )
    if iterations < 0 or eval_episodes < 1:
        raise ConfigError("iterations must be >= 0 and eval_episodes >= 1")

    spec = resolve(env_id)
    env = make_env(env_id, overrides)
    integer = spec.config_cls is SupplyChainConfig
    # inventory stages have individual caps tighter than the box bound
    high = np.asarray(env.config.capacity, dtype=float) if integer else None
    rows, cols = _policy_shape(env)
    stream = RngStream(seed, f"cem/{spec.env_id}")
    seeds = stream.split("episodes").generator.integers(0, 2**62, size=eval_episodes)
    sampler = stream.split("population").generator

    def score(weights: np.ndarray) -> float:
        policy = _policy_from(weights, env, integer, high)
        return float(
            np.mean([run_episode(env, policy, int(s)).total_reward for s in seeds])
        )

    mean = np.zeros((rows, cols))
    std = np.ones((rows, cols))
    curve = [score(mean)]
    for _ in range(iterations):
        candidates = sampler.normal(
            mean[None], std[None], size=(population, rows, cols)
        )
        rewards = np.array([score(c) for c in candidates])
        elite_idx = np.argsort(rewards)[-n_elite:]
        elite = candidates[elite_idx]
        mean = elite.mean(axis=0)
        std = np.maximum(elite.std(axis=0), _STD_FLOOR)
        curve.append(float(rewards[elite_idx].mean()))
    return _policy_from(mean, env, integer, high), np.array(curve)
