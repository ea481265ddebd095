"""String-id environment registry shared by the CLI and external bindings.

Each id maps to a config dataclass plus a builder; overrides are validated
against the dataclass fields so typos fail loudly at construction.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Callable

from .assets import AssetAllocationEnv, MpaaConfig
from .core import ConfigError, Environment, RngStream
from .inventory import InventoryChainEnv, SupplyChainConfig
from .knapsack import (
    KnapsackInstance,
    OfflineKnapsackEnv,
    OnlineKnapsackEnv,
    generate_instance,
)
from .vmpacking import VmPackingConfig, VmPackingEnv


@dataclass(frozen=True)
class KnapsackEnvConfig:
    """Generator parameters for the knapsack episode families."""

    n_items: int = 200
    capacity: int = 200
    value_range: tuple = (1, 100)
    weight_range: tuple = (1, 100)
    count_range: tuple = (1, 10)
    draw_count: int = 50  # online variant only
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_items < 1 or self.capacity < 0 or self.draw_count < 1:
            raise ConfigError("n_items/draw_count must be positive, capacity nonnegative")
        for name in ("value_range", "weight_range", "count_range"):
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise ConfigError(f"{name} must satisfy 1 <= low <= high")


def knapsack_instance(config: KnapsackEnvConfig, variant: str) -> KnapsackInstance:
    """The instance an env id with this config denotes, derived from its seed."""
    return generate_instance(
        variant,
        RngStream(config.seed, "instance"),
        n_items=config.n_items,
        capacity=config.capacity,
        value_range=config.value_range,
        weight_range=config.weight_range,
        count_range=config.count_range,
    )


def _build_offline(config: KnapsackEnvConfig, variant: str) -> Environment:
    return OfflineKnapsackEnv(knapsack_instance(config, variant), seed=config.seed)


def _build_online(config: KnapsackEnvConfig) -> Environment:
    return OnlineKnapsackEnv(
        knapsack_instance(config, "binary"),
        draw_count=config.draw_count,
        seed=config.seed,
    )


@dataclass(frozen=True)
class EnvSpec:
    env_id: str
    config_cls: type
    build: Callable[[Any], Environment]
    summary: str
    fixed: dict = None  # config fields the id itself pins down


_SPECS = [
    EnvSpec(
        "knapsack-binary",
        KnapsackEnvConfig,
        lambda c: _build_offline(c, "binary"),
        "offline 0/1 knapsack, one pick per step",
    ),
    EnvSpec(
        "knapsack-bounded",
        KnapsackEnvConfig,
        lambda c: _build_offline(c, "bounded"),
        "offline knapsack with per-item copy counts",
    ),
    EnvSpec(
        "knapsack-online",
        KnapsackEnvConfig,
        _build_online,
        "items stream in one at a time, accept or pass",
    ),
    EnvSpec(
        "vm-packing",
        VmPackingConfig,
        lambda c: VmPackingEnv(c, masked=True),
        "place VMs on physical machines, feasibility-masked",
        fixed={},
    ),
    EnvSpec(
        "vm-packing-unmasked",
        VmPackingConfig,
        lambda c: VmPackingEnv(c, masked=False),
        "VM placement where overloads end the episode with a penalty",
        fixed={},
    ),
    EnvSpec(
        "inventory-backlog",
        SupplyChainConfig,
        InventoryChainEnv,
        "multi-stage inventory chain, unmet retail demand backlogs",
        fixed={"backlog": True},
    ),
    EnvSpec(
        "inventory-lost-sales",
        SupplyChainConfig,
        InventoryChainEnv,
        "multi-stage inventory chain, unmet retail demand is lost",
        fixed={"backlog": False},
    ),
    EnvSpec(
        "asset-allocation",
        MpaaConfig,
        AssetAllocationEnv,
        "multi-period portfolio rebalancing, final-wealth reward",
    ),
]

_REGISTRY = {spec.env_id: spec for spec in _SPECS}

ALIASES = {
    "InvManagement-v0": "inventory-backlog",
    "InvManagement-v1": "inventory-lost-sales",
}


def env_ids() -> list[str]:
    """Canonical ids, sorted; aliases excluded."""
    return sorted(_REGISTRY)


def resolve(env_id: str) -> EnvSpec:
    canonical = ALIASES.get(env_id, env_id)
    spec = _REGISTRY.get(canonical)
    if spec is None:
        valid = ", ".join(sorted(list(_REGISTRY) + list(ALIASES)))
        raise ConfigError(f"unknown environment id {env_id!r}; valid ids: {valid}")
    return spec


def make_config(env_id: str, overrides: dict | None = None) -> Any:
    """Build the config object an env id denotes, applying overrides."""
    spec = resolve(env_id)
    overrides = dict(overrides or {})
    fixed = spec.fixed or {}
    fields = set(spec.config_cls.__dataclass_fields__)
    for key in overrides:
        if key in fixed:
            raise ConfigError(
                f"config key {key!r} is determined by the env id {env_id!r}"
            )
        if key not in fields:
            valid = ", ".join(sorted(fields - set(fixed)))
            raise ConfigError(
                f"unknown config key {key!r} for {env_id!r}; valid keys: {valid}"
            )
    return spec.config_cls(**{**overrides, **fixed})


def make_env(env_id: str, overrides: dict | None = None, **kwargs: Any) -> Environment:
    """Instantiate an environment by id; kwargs and the mapping are merged."""
    merged = dict(overrides or {})
    for key, value in kwargs.items():
        merged[key] = value
    spec = resolve(env_id)
    return spec.build(make_config(env_id, merged))
