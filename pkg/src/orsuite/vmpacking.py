"""Virtual machine packing onto a fixed pool of physical machines.

One request arrives per step over a day of 20-minute slots (72 steps). Loads
are normalized per dimension (cpu, mem) so a PM holds at most 1.0 of each.
The per-step reward is the summed negative slack of open machines, so keeping
few machines open is good; an overload in the unmasked variant ends the
episode with a large penalty.

Observation layout: open flags (P), cpu loads (P), mem loads (P), then the
incoming request's cpu and mem demand.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import (
    ActionError,
    ConfigError,
    DiscreteSpace,
    Environment,
    Observation,
    OrSuiteError,
    RngStream,
    StepResult,
)


class PlacementError(OrSuiteError):
    """FirstFit found no machine that can host the request."""


@dataclass(frozen=True)
class VmPackingConfig:
    pm_count: int = 50
    steps: int = 72
    overload_penalty: float = -1000.0
    demand_mean: float = 0.05
    demand_concentration: float = 40.0
    durations_enabled: bool = False
    duration_mean: float = 24.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.pm_count < 1 or self.steps < 1:
            raise ConfigError("pm_count and steps must be positive")
        if not (0.0 < self.demand_mean < 1.0):
            raise ConfigError("demand_mean must lie in (0, 1)")
        if self.demand_concentration <= 0 or self.duration_mean < 1:
            raise ConfigError("bad demand_concentration or duration_mean")


@dataclass(frozen=True)
class VmRequest:
    cpu: float
    mem: float
    duration: float = math.inf  # steps the VM stays; inf = persistent

    def __post_init__(self) -> None:
        if not (0.0 < self.cpu <= 1.0 and 0.0 < self.mem <= 1.0):
            raise ConfigError("request demands must lie in (0, 1]")
        if not (self.duration == math.inf or self.duration >= 1):
            raise ConfigError("duration must be >= 1 or infinite")


def generate_requests(config: VmPackingConfig, stream: RngStream) -> list[VmRequest]:
    """Synthetic demand: per-dimension Beta draws with the configured mean."""
    a = config.demand_mean * config.demand_concentration
    b = (1.0 - config.demand_mean) * config.demand_concentration
    rng = stream.split("demand").generator
    loads = np.clip(rng.beta(a, b, size=(config.steps, 2)), 1e-9, 1.0)
    if config.durations_enabled:
        durations = stream.split("durations").generator.geometric(
            1.0 / config.duration_mean, size=config.steps
        ).astype(float)
    else:
        durations = np.full(config.steps, math.inf)
    return [
        VmRequest(cpu=float(c), mem=float(m), duration=float(d))
        for (c, m), d in zip(loads, durations)
    ]


def save_trace(requests: list[VmRequest], path: str | Path) -> None:
    """CSV rows `step,cpu,mem,duration`; duration "inf" for persistent VMs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "cpu", "mem", "duration"])
        for t, req in enumerate(requests):
            dur = "inf" if req.duration == math.inf else str(int(req.duration))
            writer.writerow([t, repr(req.cpu), repr(req.mem), dur])


def load_trace(path: str | Path) -> list[VmRequest]:
    requests = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            dur = math.inf if row["duration"] == "inf" else float(int(row["duration"]))
            requests.append(
                VmRequest(cpu=float(row["cpu"]), mem=float(row["mem"]), duration=dur)
            )
    return requests


def step_reward(open_flags: np.ndarray, cpu: np.ndarray, mem: np.ndarray) -> float:
    """Summed (cpu + mem - 2) over open machines; 0 when everything is closed."""
    if not np.any(open_flags):
        return 0.0
    return float(np.sum(cpu[open_flags] + mem[open_flags] - 2.0))


def action_mask(cpu: np.ndarray, mem: np.ndarray, request: VmRequest) -> np.ndarray:
    """True where the request fits in both dimensions."""
    return (cpu + request.cpu <= 1.0 + 1e-12) & (mem + request.mem <= 1.0 + 1e-12)


def first_fit(
    open_flags: np.ndarray, cpu: np.ndarray, mem: np.ndarray, request: VmRequest
) -> int:
    """Lowest-index open PM that fits both dimensions, else lowest closed PM."""
    fits = action_mask(cpu, mem, request)
    open_and_fits = np.flatnonzero(open_flags & fits)
    if open_and_fits.size:
        return int(open_and_fits[0])
    closed = np.flatnonzero(~open_flags)
    if closed.size:
        return int(closed[0])
    raise PlacementError("all machines open and none fits the request")


class VmPackingEnv(Environment):
    """Masked variant exposes a feasibility mask and rejects masked-off
    placements; the unmasked variant accepts any PM index and punishes an
    overload with `overload_penalty`, ending the episode.

    A fixed trace of requests can be supplied to replay recorded demand;
    otherwise each episode presamples its requests from the episode stream.
    """

    def __init__(
        self,
        config: VmPackingConfig | None = None,
        masked: bool = True,
        trace: list[VmRequest] | None = None,
    ) -> None:
        config = config or VmPackingConfig()
        super().__init__(config.seed)
        if trace is not None:
            if not trace:
                raise ConfigError("an explicit trace needs at least one request")
            config = replace(config, steps=len(trace))
        self.config = config
        self.masked = masked
        self.trace = trace
        self.action_space = DiscreteSpace(config.pm_count)
        self.observation_size = 3 * config.pm_count + 2
        self.max_steps = config.steps
        p = config.pm_count
        self.cpu = np.zeros(p)
        self.mem = np.zeros(p)
        self.open_flags = np.zeros(p, dtype=bool)
        self.requests: list[VmRequest] = []
        self._hosted: list[list[list[float]]] = [[] for _ in range(p)]
        self._t = 0

    # -- state helpers -------------------------------------------------

    def _current_request(self) -> VmRequest:
        return self.requests[min(self._t, len(self.requests) - 1)]

    def _observe(self) -> Observation:
        req = self._current_request()
        vals = np.concatenate(
            [self.open_flags.astype(float), self.cpu, self.mem, [req.cpu, req.mem]]
        )
        mask = action_mask(self.cpu, self.mem, req) if self.masked else None
        return Observation(values=vals, mask=mask)

    def _expire(self) -> None:
        for p, vms in enumerate(self._hosted):
            keep = []
            for vm in vms:
                vm[2] -= 1.0
                if vm[2] > 0.0:
                    keep.append(vm)
                else:
                    self.cpu[p] -= vm[0]
                    self.mem[p] -= vm[1]
            self._hosted[p] = keep
        # guard against float drift on emptied machines
        for p, vms in enumerate(self._hosted):
            if not vms:
                self.cpu[p] = 0.0
                self.mem[p] = 0.0
        self.open_flags = np.array([bool(vms) for vms in self._hosted])

    def _reset(self, stream: RngStream) -> Observation:
        p = self.config.pm_count
        self.cpu = np.zeros(p)
        self.mem = np.zeros(p)
        self.open_flags = np.zeros(p, dtype=bool)
        self._hosted = [[] for _ in range(p)]
        self._t = 0
        if self.trace is not None:
            self.requests = list(self.trace)
        else:
            self.requests = generate_requests(self.config, stream)
        return self._observe()

    def _step(self, action) -> StepResult:
        p = int(action)
        req = self._current_request()
        if self.masked:
            mask = action_mask(self.cpu, self.mem, req)
            if not mask[p]:
                raise ActionError(f"machine {p} cannot host the incoming request")
        self.cpu[p] += req.cpu
        self.mem[p] += req.mem
        self._hosted[p].append([req.cpu, req.mem, req.duration])
        self.open_flags[p] = True
        info = {"pm": float(p), "cpu": float(self.cpu[p]), "mem": float(self.mem[p])}
        if self.cpu[p] > 1.0 + 1e-12 or self.mem[p] > 1.0 + 1e-12:
            # only reachable unmasked; the episode ends on the overload
            return StepResult(
                observation=self._observe(),
                reward=float(self.config.overload_penalty),
                done=True,
                info=info,
            )
        reward = step_reward(self.open_flags, self.cpu, self.mem)
        if self.config.durations_enabled:
            self._expire()
        self._t += 1
        done = self._t >= self.config.steps
        obs = self._observe()
        if not done and self.masked and not np.any(obs.mask):
            # incoming request fits nowhere: end gracefully, no penalty
            done = True
            info["mask_exhausted"] = 1.0
        return StepResult(observation=obs, reward=reward, done=done, info=info)


class FirstFitPolicy:
    """FirstFit driven purely by the observation vector."""

    def __init__(self, pm_count: int = 50) -> None:
        self.pm_count = pm_count

    def __call__(self, obs: Observation) -> int:
        p = self.pm_count
        open_flags = obs.values[:p] > 0.5
        cpu = obs.values[p : 2 * p]
        mem = obs.values[2 * p : 3 * p]
        req = VmRequest(cpu=float(obs.values[3 * p]), mem=float(obs.values[3 * p + 1]))
        return first_fit(open_flags, cpu, mem, req)


class RandomPlacementPolicy:
    """Uniform over feasible machines (needs the masked env); uniform over
    every machine when no mask is exposed."""

    def __init__(self, pm_count: int = 50) -> None:
        self.pm_count = pm_count
        self._rng = np.random.default_rng(0)

    def begin_episode(self, stream: RngStream) -> None:
        self._rng = stream.split("placement").generator

    def __call__(self, obs: Observation) -> int:
        if obs.mask is not None:
            choices = np.flatnonzero(obs.mask)
            if choices.size == 0:
                return 0
            return int(self._rng.choice(choices))
        return int(self._rng.integers(0, self.pm_count))
