"""Environment contract basics: seeding, done latch, episode runner."""
import numpy as np
import pytest

from orsuite.core import (
    ActionError,
    DiscreteSpace,
    Environment,
    Observation,
    PolicyError,
    RngStream,
    StateError,
    StepResult,
    run_episode,
)


class _CountEnv(Environment):
    """Tiny two-action env: action 0 scores a seeded draw, action 1 scores 0."""

    observation_size = 1
    action_space = DiscreteSpace(2)
    max_steps = 5

    def _reset(self, stream):
        self._draws = stream.split("draws").generator.uniform(0.0, 1.0, size=self.max_steps)
        self._t = 0
        return Observation(values=np.array([0.0]))

    def _step(self, action):
        reward = float(self._draws[self._t]) if action == 0 else 0.0
        self._t += 1
        return StepResult(
            observation=Observation(values=np.array([float(self._t)])),
            reward=reward,
            done=False,
        )


def test_stream_repeats_for_same_seed_and_name():
    a = RngStream(42, "demand").generator.uniform(size=8)
    b = RngStream(42, "demand").generator.uniform(size=8)
    assert np.array_equal(a, b)


def test_streams_with_different_names_are_independent():
    a = RngStream(42, "demand").generator.uniform(size=8)
    b = RngStream(42, "prices").generator.uniform(size=8)
    assert not np.array_equal(a, b)
    # drawing from one stream must not advance the other
    s = RngStream(42, "demand")
    s.generator.uniform(size=100)
    c = RngStream(42, "prices").generator.uniform(size=8)
    assert np.array_equal(b, c)


def test_split_is_deterministic():
    a = RngStream(7).split("x").generator.integers(0, 1000, size=5)
    b = RngStream(7).split("x").generator.integers(0, 1000, size=5)
    assert np.array_equal(a, b)


def test_reset_with_seed_is_reproducible():
    env = _CountEnv()
    env.reset(seed=7)
    first = [env.step(0).reward for _ in range(5)]
    env.reset(seed=7)
    second = [env.step(0).reward for _ in range(5)]
    assert first == second


def test_reset_without_seed_advances_but_replays_from_master():
    env1 = _CountEnv(seed=11)
    env2 = _CountEnv(seed=11)
    for _ in range(3):
        env1.reset()
        env2.reset()
        assert env1.step(0).reward == env2.step(0).reward


def test_step_after_done_rejected():
    env = _CountEnv()
    env.reset(seed=1)
    for _ in range(env.max_steps):
        result = env.step(0)
    assert result.done
    with pytest.raises(StateError):
        env.step(0)


def test_out_of_range_action_rejected():
    env = _CountEnv()
    env.reset(seed=1)
    with pytest.raises(ActionError):
        env.step(9)
    with pytest.raises(ActionError):
        env.step("zero")


def test_run_episode_records_totals():
    env = _CountEnv()
    rec = run_episode(env, lambda obs: 0, seed=3)
    assert rec.steps == env.max_steps
    assert rec.total_reward == pytest.approx(sum(rec.rewards))
    again = run_episode(env, lambda obs: 0, seed=3)
    assert rec == again


def test_run_episode_flags_bad_policy_with_step_index():
    env = _CountEnv()

    def bad(obs):
        return 0 if obs.values[0] < 2 else 99

    with pytest.raises(PolicyError) as err:
        run_episode(env, bad, seed=0)
    assert "step 2" in str(err.value)
