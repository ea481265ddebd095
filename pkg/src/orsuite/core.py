"""Shared environment contract: observations, seeded streams, episode runner.

Every environment in this package is episodic and fully observable through a
flat float vector. Randomness always flows from a single master seed that is
split into independent named substreams, so adding a new consumer of
randomness never perturbs the draws of an existing one.
"""
from __future__ import annotations

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np


class OrSuiteError(Exception):
    """Base for every error raised by this package."""


class ConfigError(OrSuiteError):
    """Bad configuration value or unknown configuration key."""


class ActionError(OrSuiteError):
    """Action outside the action space or rejected by the environment."""


class StateError(OrSuiteError):
    """Environment used out of order, e.g. step() after done without reset()."""


class PolicyError(OrSuiteError):
    """A policy emitted an action its environment rejected."""


def _stream_entropy(seed: int, name: str) -> list[int]:
    # Hash the stream name into extra entropy words so (seed, name) pairs are
    # independent and stable across platforms and numpy versions.
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in (0, 4, 8, 12)]
    return [seed & 0xFFFFFFFFFFFFFFFF, *words]


class RngStream:
    """Named random stream derived from a master seed.

    The same (seed, name) pair always yields the same draw sequence, and
    streams with different names are statistically independent.
    """

    def __init__(self, seed: int, name: str = "") -> None:
        if seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {seed}")
        self.seed = int(seed)
        self.name = name
        self.generator = np.random.default_rng(
            np.random.SeedSequence(_stream_entropy(self.seed, name))
        )

    def split(self, name: str) -> "RngStream":
        """Derive a child stream; children never share draws with the parent."""
        return RngStream(self.seed, f"{self.name}/{name}")

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, name={self.name!r})"


@dataclass(frozen=True)
class DiscreteSpace:
    """Actions are integers 0..n-1."""

    n: int


@dataclass(frozen=True)
class BoxSpace:
    """Actions are float vectors with elementwise bounds."""

    low: float
    high: float
    size: int


@dataclass
class Observation:
    """Flat float vector plus an optional boolean validity mask over actions."""

    values: np.ndarray
    mask: np.ndarray | None = None


@dataclass
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict[str, Any] = field(default_factory=dict)


class Environment(ABC):
    """Episodic environment: reset(seed) -> Observation, step(action) -> StepResult.

    Subclasses set `observation_size`, `action_space` and `max_steps`, and
    implement `_reset(stream)` and `_step(action)`. The base class owns seed
    bookkeeping, the done latch, and discrete action validation.
    """

    observation_size: int
    action_space: DiscreteSpace | BoxSpace
    max_steps: int

    def __init__(self, seed: int = 0) -> None:
        self._master_seed = int(seed)
        self._episode_index = 0
        self._done = True
        self._steps = 0
        self._episode_seed: int | None = None

    @property
    def episode_seed(self) -> int | None:
        """Seed the current episode was reset with."""
        return self._episode_seed

    @property
    def steps_taken(self) -> int:
        return self._steps

    def reset(self, seed: int | None = None) -> Observation:
        """Start a new episode.

        With an explicit seed the episode is exactly reproducible. Without
        one, episodes advance through a counter derived from the master seed,
        so back-to-back reset() calls give fresh but replayable episodes.
        """
        if seed is None:
            # counter-based derivation: same master seed, distinct stream names
            stream = RngStream(self._master_seed, f"episode/{self._episode_index}")
            episode_seed = self._master_seed
            self._episode_index += 1
        else:
            stream = RngStream(int(seed), "episode")
            episode_seed = int(seed)
        self._episode_seed = episode_seed
        self._done = False
        self._steps = 0
        return self._reset(stream)

    def step(self, action: Any) -> StepResult:
        if self._done:
            raise StateError("step() called on a finished episode; call reset() first")
        self._validate_action(action)
        result = self._step(action)
        self._steps += 1
        if self._steps >= self.max_steps:
            result.done = True
        if result.done:
            self._done = True
        return result

    def _validate_action(self, action: Any) -> None:
        space = self.action_space
        if isinstance(space, DiscreteSpace):
            if not (isinstance(action, (int, np.integer)) and 0 <= int(action) < space.n):
                raise ActionError(
                    f"action {action!r} outside discrete space of size {space.n}"
                )
        else:
            arr = np.asarray(action, dtype=float)
            if arr.shape != (space.size,):
                raise ActionError(
                    f"action shape {arr.shape} does not match box size {space.size}"
                )
            if not np.all(np.isfinite(arr)):
                raise ActionError("action contains non-finite values")

    @abstractmethod
    def _reset(self, stream: RngStream) -> Observation:
        """Regenerate all episode state from the given stream."""

    @abstractmethod
    def _step(self, action: Any) -> StepResult:
        """Advance one step. Called only while the episode is live."""


Policy = Callable[[Observation], Any]


@dataclass
class EpisodeRecord:
    """Replayable trace of one episode: rerunning the seed reproduces it."""

    seed: int
    total_reward: float
    steps: int
    actions: list
    rewards: list[float]


def run_episode(env: Environment, policy: Policy, seed: int) -> EpisodeRecord:
    """Roll one episode of `env` under `policy`, both driven by `seed`.

    Stateful policies may expose begin_episode(stream); it is called right
    after reset with a policy-private substream. A policy action the
    environment rejects aborts the run with a PolicyError naming the step.
    """
    obs = env.reset(seed)
    begin = getattr(policy, "begin_episode", None)
    if begin is not None:
        begin(RngStream(seed, "policy"))
    actions: list = []
    rewards: list[float] = []
    total = 0.0
    done = False
    step_index = 0
    while not done:
        action = policy(obs)
        try:
            result = env.step(action)
        except ActionError as exc:
            raise PolicyError(
                f"policy produced invalid action {action!r} at step {step_index}: {exc}"
            ) from exc
        actions.append(action)
        rewards.append(result.reward)
        total += result.reward
        obs = result.observation
        done = result.done
        step_index += 1
    return EpisodeRecord(
        seed=seed, total_reward=total, steps=step_index, actions=actions, rewards=rewards
    )
