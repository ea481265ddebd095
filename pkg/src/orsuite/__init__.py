"""Seedable operations-research decision environments with exact baselines."""

from .core import (
    ActionError,
    BoxSpace,
    ConfigError,
    DiscreteSpace,
    Environment,
    EpisodeRecord,
    Observation,
    OrSuiteError,
    PolicyError,
    RngStream,
    StateError,
    StepResult,
    run_episode,
)
from .registry import ALIASES, env_ids, make_config, make_env

__version__ = "0.1.0"

__all__ = [
    "ALIASES",
    "ActionError",
    "BoxSpace",
    "ConfigError",
    "DiscreteSpace",
    "Environment",
    "EpisodeRecord",
    "Observation",
    "OrSuiteError",
    "PolicyError",
    "RngStream",
    "StateError",
    "StepResult",
    "env_ids",
    "make_config",
    "make_env",
    "run_episode",
    "__version__",
]
