"""Parity tests: the bridge must reproduce native trajectories bit for bit."""
import numpy as np
import pytest

import orsuite
from orsuite.core import ActionError, ConfigError, StateError

from orsuite_gym import Box, BridgedEnv, Discrete, make, spaces, wrap_env

STEPS = 100


def scripted_action(env_id, k, n_actions, mask):
    """Deterministic action script both runners derive from their own outputs."""
    if mask is not None:
        allowed = np.flatnonzero(mask)
        return int(allowed[k % allowed.size])
    if n_actions is not None:
        return k % n_actions
    if env_id.startswith("inventory") or env_id.startswith("InvManagement"):
        return np.array([float(k % 11), float(k % 7), float(k % 5)])
    return np.array([((-1.0) ** k) * (k % 9), float(k % 5) - 2.0, 0.5 * (k % 3)])


def native_trajectory(env_id, steps=STEPS):
    env = orsuite.make_env(env_id, seed=11)
    n = env.action_space.n if hasattr(env.action_space, "n") else None
    frames = []
    episode = 0
    obs = env.reset(seed=episode)
    frames.append(("reset", obs.values.copy()))
    mask = obs.mask
    for k in range(steps):
        result = env.step(scripted_action(env_id, k, n, mask))
        frames.append(
            ("step", result.observation.values.copy(), result.reward, result.done)
        )
        mask = result.observation.mask
        if result.done:
            episode += 1
            obs = env.reset(seed=episode)
            frames.append(("reset", obs.values.copy()))
            mask = obs.mask
    return frames


def bridged_trajectory(env_id, steps=STEPS):
    env = wrap_env(env_id, {"seed": 11})
    n = env.action_space.n if isinstance(env.action_space, Discrete) else None
    frames = []
    episode = 0
    values = env.reset(seed=episode)
    frames.append(("reset", values.copy()))
    mask = env.action_mask
    for k in range(steps):
        values, reward, done, info = env.step(scripted_action(env_id, k, n, mask))
        frames.append(("step", values.copy(), reward, done))
        mask = info.get("mask")
        if done:
            episode += 1
            values = env.reset(seed=episode)
            frames.append(("reset", values.copy()))
            mask = env.action_mask
    return frames


def assert_frames_identical(native, bridged):
    assert len(native) == len(bridged)
    for i, (a, b) in enumerate(zip(native, bridged)):
        assert a[0] == b[0], f"frame {i}: {a[0]} vs {b[0]}"
        assert a[1].dtype == b[1].dtype
        assert np.array_equal(a[1], b[1]), f"frame {i}: observations differ"
        if a[0] == "step":
            assert a[2] == b[2], f"frame {i}: rewards differ ({a[2]} vs {b[2]})"
            assert a[3] == b[3], f"frame {i}: done flags differ"


@pytest.mark.parametrize("env_id", orsuite.env_ids())
def test_hundred_step_parity(env_id):
    assert_frames_identical(native_trajectory(env_id), bridged_trajectory(env_id))


def test_alias_ids_accepted():
    for alias in orsuite.ALIASES:
        assert_frames_identical(
            native_trajectory(alias, steps=35), bridged_trajectory(alias, steps=35)
        )


# -- calling convention ---------------------------------------------------------


def test_reset_and_step_shapes():
    env = make("knapsack-binary", seed=3)
    values = env.reset(seed=0)
    assert isinstance(values, np.ndarray) and values.ndim == 1
    out = env.step(int(np.flatnonzero(env.action_mask)[0]))
    assert isinstance(out, tuple) and len(out) == 4
    values, reward, done, info = out
    assert isinstance(values, np.ndarray)
    assert isinstance(reward, float)
    assert isinstance(done, bool)
    assert isinstance(info, dict)


def test_mask_rides_in_info_only_when_present():
    masked = make("knapsack-binary", seed=1)
    masked.reset(seed=0)
    _, _, _, info = masked.step(int(np.flatnonzero(masked.action_mask)[0]))
    assert info["mask"].dtype == bool
    unmasked = make("asset-allocation", seed=1)
    unmasked.reset(seed=0)
    assert unmasked.action_mask is None
    _, _, _, info = unmasked.step(np.zeros(3))
    assert "mask" not in info


def test_space_descriptors_match_native_declarations():
    vm = make("vm-packing")
    assert spaces(vm) == (Box(-np.inf, np.inf, (152,)), Discrete(50))
    mpaa = make("asset-allocation")
    obs_space, act_space = spaces(mpaa)
    assert act_space == Box(-2000.0, 2000.0, (3,))
    assert obs_space.shape == (1 + 2 * 3,)
    binkp = make("knapsack-binary")
    assert binkp.action_space == Discrete(200)
    assert binkp.observation_space.shape == (binkp.native.observation_size,)


def test_space_contains():
    assert Discrete(5).contains(4) and not Discrete(5).contains(5)
    assert not Discrete(5).contains("north")
    box = Box(-2.0, 2.0, (3,))
    assert box.contains([0.0, 1.5, -2.0])
    assert not box.contains([0.0, 2.5, 0.0])
    assert not box.contains([0.0, 1.0])


def test_config_kwargs_reach_the_native_env():
    env = make("vm-packing", pm_count=10, seed=3)
    assert env.action_space == Discrete(10)
    assert env.reset(seed=0).shape == (3 * 10 + 2,)


# -- errors cross the boundary verbatim -------------------------------------------


def test_unknown_id_error_text_matches_native():
    with pytest.raises(ConfigError) as native_err:
        orsuite.make_env("knapsack-cubic")
    with pytest.raises(ConfigError) as bridged_err:
        wrap_env("knapsack-cubic")
    assert str(bridged_err.value) == str(native_err.value)
    assert "valid ids" in str(bridged_err.value)


def test_bad_config_key_named():
    with pytest.raises(ConfigError, match="cores"):
        wrap_env("vm-packing", {"cores": 4})


def test_invalid_action_error_text_matches_native():
    native = orsuite.make_env("vm-packing", overrides={"pm_count": 4, "seed": 5})
    native.reset(seed=0)
    bridged = wrap_env("vm-packing", {"pm_count": 4, "seed": 5})
    bridged.reset(seed=0)
    with pytest.raises(ActionError) as nat_err:
        native.step(99)
    with pytest.raises(ActionError) as br_err:
        bridged.step(99)
    assert str(br_err.value) == str(nat_err.value)


def test_finished_episode_error_text_matches_native():
    native = orsuite.make_env("asset-allocation", overrides={"horizon": 2, "seed": 2})
    native.reset(seed=0)
    while not native.step(np.zeros(3)).done:
        pass
    with pytest.raises(StateError) as nat_err:
        native.step(np.zeros(3))

    bridged = wrap_env("asset-allocation", {"horizon": 2, "seed": 2})
    bridged.reset(seed=0)
    done = False
    while not done:
        _, _, done, _ = bridged.step(np.zeros(3))
    with pytest.raises(StateError) as br_err:
        bridged.step(np.zeros(3))
    assert str(br_err.value) == str(nat_err.value)


# -- instance isolation -------------------------------------------------------------


def test_interleaved_instances_do_not_share_state():
    def run_solo(seed):
        env = make("knapsack-binary", seed=seed)
        env.reset(seed=0)
        frames = []
        for k in range(20):
            allowed = np.flatnonzero(env.action_mask)
            values, reward, done, _ = env.step(int(allowed[k % allowed.size]))
            frames.append((values.copy(), reward, done))
            if done:
                env.reset(seed=len(frames))
        return frames

    solo_a, solo_b = run_solo(1), run_solo(2)

    env_a, env_b = make("knapsack-binary", seed=1), make("knapsack-binary", seed=2)
    env_a.reset(seed=0)
    env_b.reset(seed=0)
    inter_a, inter_b = [], []
    for k in range(20):
        for env, frames in ((env_a, inter_a), (env_b, inter_b)):
            allowed = np.flatnonzero(env.action_mask)
            values, reward, done, _ = env.step(int(allowed[k % allowed.size]))
            frames.append((values.copy(), reward, done))
            if done:
                env.reset(seed=len(frames))

    for solo, inter in ((solo_a, inter_a), (solo_b, inter_b)):
        for (va, ra, da), (vb, rb, db) in zip(solo, inter):
            assert np.array_equal(va, vb) and ra == rb and da == db


def test_wrapper_holds_one_native_instance():
    env = make("knapsack-online", seed=4)
    assert isinstance(env, BridgedEnv)
    assert env.native.action_space.n == env.action_space.n == 2
