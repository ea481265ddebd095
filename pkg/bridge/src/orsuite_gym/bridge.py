"""Classic episodic adapter over the native environments.

The wrapper delegates 1:1 and holds no logic of its own: no reward shaping,
no observation transforms. `reset(seed)` hands back the observation vector,
`step(action)` the usual `(observation, reward, done, info)` tuple, with the
action-validity mask riding in `info["mask"]` whenever the task has one.
Native exceptions cross the boundary untouched.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

import orsuite


@dataclass(frozen=True)
class Discrete:
    """Integer actions 0..n-1."""

    n: int

    def contains(self, action: Any) -> bool:
        try:
            value = int(action)
        except (TypeError, ValueError):
            return False
        return 0 <= value < self.n


@dataclass(frozen=True)
class Box:
    """Float vectors bounded elementwise by scalar low/high."""

    low: float
    high: float
    shape: tuple[int, ...]

    def contains(self, action: Any) -> bool:
        arr = np.asarray(action, dtype=float)
        if arr.shape != self.shape:
            return False
        return bool(np.all(arr >= self.low) and np.all(arr <= self.high))


def _convert_space(space: Any) -> Discrete | Box:
    if isinstance(space, orsuite.DiscreteSpace):
        return Discrete(space.n)
    if isinstance(space, orsuite.BoxSpace):
        return Box(low=space.low, high=space.high, shape=(space.size,))
    raise TypeError(f"no descriptor for native space {type(space).__name__}")


class BridgedEnv:
    """One native environment instance behind reset/step calls.

    Attributes:
        native: the wrapped environment, for callers that need the full API.
        observation_space / action_space: cached descriptors whose shapes and
            bounds equal the native declarations.
        action_mask: the mask from the most recent reset or step, or None for
            unmasked tasks. `step` also surfaces it in `info["mask"]`.
    """

    def __init__(self, env: Any) -> None:
        self.native = env
        self.observation_space = Box(
            low=-np.inf, high=np.inf, shape=(env.observation_size,)
        )
        self.action_space = _convert_space(env.action_space)
        self._mask: np.ndarray | None = None

    def reset(self, seed: int | None = None) -> np.ndarray:
        obs = self.native.reset(seed=seed)
        self._mask = obs.mask
        return obs.values

    def step(self, action: Any) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        result = self.native.step(action)
        obs = result.observation
        self._mask = obs.mask
        info = dict(result.info)
        if obs.mask is not None:
            info["mask"] = obs.mask
        return obs.values, result.reward, result.done, info

    @property
    def action_mask(self) -> np.ndarray | None:
        return self._mask


def wrap_env(env_id: str, config: dict[str, Any] | None = None) -> BridgedEnv:
    """Build the named environment and wrap it.

    Unknown ids and bad config keys raise the native errors unchanged.
    """
    return BridgedEnv(orsuite.make_env(env_id, overrides=dict(config or {})))


def make(env_id: str, **config: Any) -> BridgedEnv:
    return wrap_env(env_id, config)


def spaces(bridged: BridgedEnv) -> tuple[Box, Discrete | Box]:
    return bridged.observation_space, bridged.action_space


def env_ids() -> tuple[str, ...]:
    return tuple(orsuite.env_ids())
