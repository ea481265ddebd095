"""Portfolio env, trade projection, LP planning, and Monte Carlo evaluation."""
import numpy as np
import pytest

from orsuite.assets import (
    AssetAllocationEnv,
    MpaaConfig,
    TradePlan,
    apply_trades,
    deterministic_plan,
    evaluate_plan,
    initial_portfolio,
    load_config,
    load_plan,
    make_mpaa_env,
    sample_price_paths,
    save_config,
    save_plan,
    simulate_plan,
)
from orsuite.core import ActionError, ConfigError, RngStream


def flat_config(**overrides) -> MpaaConfig:
    """Constant prices 10/20/40 over the horizon."""
    defaults = dict(price_growth=0.0, seed=0)
    defaults.update(overrides)
    return MpaaConfig(**defaults)


def state_at(config: MpaaConfig, cash: float, holdings, prices) -> "PortfolioState":
    state = initial_portfolio(config, np.asarray(prices, dtype=float))
    state.cash = cash
    state.holdings = np.asarray(holdings, dtype=float)
    return state


# -- trade execution ---------------------------------------------------------


def test_buy_charges_purchase_cost():
    config = flat_config()
    state = state_at(config, 100.0, [0.0, 0.0, 0.0], [10.0, 20.0, 40.0])
    new, info = apply_trades(state, np.array([5.0, 0.0, 0.0]), config, state.prices)
    # 5 units at 10 with 1% fee: 50.5 out of 100
    assert new.cash == pytest.approx(49.5)
    assert new.holdings[0] == pytest.approx(5.0)
    assert info["buy_scale"] == pytest.approx(1.0)
    assert new.period == state.period + 1


def test_sell_credits_net_proceeds():
    config = flat_config()
    state = state_at(config, 0.0, [0.0, 2.0, 0.0], [10.0, 20.0, 40.0])
    new, info = apply_trades(state, np.array([0.0, -2.0, 0.0]), config, state.prices)
    # 2 units at 20 less 1%: 39.6
    assert new.cash == pytest.approx(39.6)
    assert new.holdings[1] == pytest.approx(0.0)
    assert info["sell_shortfall"] == pytest.approx(0.0)


def test_zero_trade_only_advances_period():
    config = flat_config()
    state = state_at(config, 77.0, [1.0, 2.0, 3.0], [10.0, 20.0, 40.0])
    new, _ = apply_trades(state, np.zeros(3), config, np.array([11.0, 21.0, 41.0]))
    assert new.cash == pytest.approx(77.0)
    assert new.holdings == pytest.approx([1.0, 2.0, 3.0])
    assert new.period == state.period + 1
    assert new.prices == pytest.approx([11.0, 21.0, 41.0])


def test_sell_capped_at_holdings():
    config = flat_config()
    state = state_at(config, 0.0, [0.0, 1.5, 0.0], [10.0, 20.0, 40.0])
    new, info = apply_trades(state, np.array([0.0, -4.0, 0.0]), config, state.prices)
    assert new.holdings[1] == pytest.approx(0.0)
    assert new.cash == pytest.approx(0.99 * 20.0 * 1.5)
    assert info["sell_shortfall"] == pytest.approx(2.5)


def test_buys_pro_rated_by_available_cash():
    config = flat_config()
    state = state_at(config, 101.0, [0.0, 0.0, 0.0], [10.0, 20.0, 40.0])
    # requested cost: (10*5 + 20*2.5) * 1.01 = 101 exactly affordable; ask double
    new, info = apply_trades(state, np.array([10.0, 5.0, 0.0]), config, state.prices)
    assert info["buy_scale"] == pytest.approx(0.5)
    assert new.holdings == pytest.approx([5.0, 2.5, 0.0])
    assert new.cash == pytest.approx(0.0, abs=1e-12)


def test_same_period_sell_funds_buy():
    config = flat_config(sale_cost=(0.0, 0.0, 0.0), purchase_cost=(0.0, 0.0, 0.0))
    state = state_at(config, 0.0, [4.0, 0.0, 0.0], [10.0, 20.0, 40.0])
    new, info = apply_trades(state, np.array([-4.0, 2.0, 0.0]), config, state.prices)
    assert info["buy_scale"] == pytest.approx(1.0)
    assert new.holdings == pytest.approx([0.0, 2.0, 0.0])
    assert new.cash == pytest.approx(0.0, abs=1e-12)


def test_costless_static_trades_conserve_wealth():
    config = flat_config(sale_cost=(0.0, 0.0, 0.0), purchase_cost=(0.0, 0.0, 0.0))
    prices = np.array([10.0, 20.0, 40.0])
    state = state_at(config, 100.0, [3.0, 1.0, 0.5], prices)
    rng = np.random.default_rng(8)
    for _ in range(50):
        delta = rng.uniform(-5, 5, size=3)
        state, _ = apply_trades(state, delta, config, prices)
        assert state.wealth() == pytest.approx(170.0)
        assert state.cash >= -1e-9
        assert np.all(state.holdings >= -1e-9)


def test_nonnegativity_under_random_trades():
    config = MpaaConfig(seed=5)
    env = make_mpaa_env(config)
    env.reset(seed=5)
    rng = np.random.default_rng(5)
    done = False
    while not done:
        result = env.step(rng.uniform(-50, 50, size=3))
        done = result.done
        assert env.state.cash >= -1e-9
        assert np.all(env.state.holdings >= -1e-9)


# -- environment --------------------------------------------------------------


def test_idle_episode_ends_with_initial_cash():
    env = make_mpaa_env()
    env.reset(seed=3)
    rewards = []
    for _ in range(env.config.horizon):
        rewards.append(env.step(np.zeros(3)).reward)
    assert rewards[:-1] == [0.0] * (env.config.horizon - 1)
    assert rewards[-1] == pytest.approx(100.0)


def test_reward_sparse_until_final_step():
    env = make_mpaa_env()
    env.reset(seed=9)
    result = env.step(np.array([2.0, 1.0, 0.5]))
    assert result.reward == 0.0
    assert not result.done


def test_price_paths_seeded():
    env_a, env_b = make_mpaa_env(), make_mpaa_env()
    env_a.reset(seed=11)
    env_b.reset(seed=11)
    assert np.array_equal(env_a.price_path, env_b.price_path)
    env_b.reset(seed=12)
    assert not np.array_equal(env_a.price_path, env_b.price_path)
    assert np.all(env_a.price_path > 0)


def test_observation_layout():
    env = make_mpaa_env()
    obs = env.reset(seed=2)
    assert obs.values.shape == (7,)
    assert obs.values[0] == pytest.approx(100.0)
    assert obs.values[1:4] == pytest.approx([0.0, 0.0, 0.0])
    assert obs.values[4:] == pytest.approx(env.price_path[:, 0])


def test_trade_bound_enforced():
    env = make_mpaa_env()
    env.reset(seed=0)
    with pytest.raises(ActionError):
        env.step(np.array([2000.5, 0.0, 0.0]))


def test_episode_reward_equals_final_wealth():
    env = make_mpaa_env()
    env.reset(seed=21)
    total = 0.0
    rng = np.random.default_rng(21)
    for _ in range(env.config.horizon):
        total += env.step(rng.uniform(-3, 3, size=3)).reward
    assert total == pytest.approx(env.state.wealth())


# -- deterministic planning -----------------------------------------------------


def test_flat_prices_plan_is_no_trade():
    plan, wealth = deterministic_plan(flat_config())
    assert wealth == pytest.approx(100.0)
    assert plan.buy == pytest.approx(np.zeros_like(plan.buy), abs=1e-7)
    assert plan.sell == pytest.approx(np.zeros_like(plan.sell), abs=1e-7)


def test_doubling_asset_compounds_wealth():
    config = MpaaConfig(
        n_assets=1,
        horizon=4,
        initial_holdings=(0.0,),
        price_mean=tuple([tuple(10.0 * 2.0**l for l in range(5))]),
        price_std=tuple([tuple([0.0] * 5)]),
        sale_cost=(0.0,),
        purchase_cost=(0.0,),
    )
    plan, wealth = deterministic_plan(config)
    assert wealth == pytest.approx(100.0 * 2.0**4, rel=1e-9)
    assert simulate_plan(plan, config, np.asarray(config.price_mean)) == pytest.approx(
        wealth, rel=1e-9
    )


def test_plan_simulation_self_consistency():
    config = MpaaConfig()
    plan, wealth = deterministic_plan(config)
    simulated = simulate_plan(plan, config, np.asarray(config.price_mean))
    assert simulated == pytest.approx(wealth, rel=1e-6)
    # growth beats cash here, so the planner actually trades
    assert wealth > 100.0
    assert plan.buy.sum() > 0.0


def test_plan_keeps_cash_nonnegative_every_period():
    config = MpaaConfig()
    plan, _ = deterministic_plan(config)
    state = initial_portfolio(config, np.asarray(config.price_mean)[:, 0])
    deltas = plan.deltas()
    for l in range(config.horizon):
        state, info = apply_trades(
            state, deltas[l], config, np.asarray(config.price_mean)[:, l + 1]
        )
        assert state.cash >= -1e-9
        # the plan is funded: nothing had to be projected away
        assert info["buy_scale"] == pytest.approx(1.0, abs=1e-9)
        assert info["sell_shortfall"] == pytest.approx(0.0, abs=1e-7)


def test_transaction_costs_never_help():
    wealths = []
    for cost in (0.0, 0.01, 0.05, 0.2):
        config = MpaaConfig(sale_cost=(cost,) * 3, purchase_cost=(cost,) * 3)
        wealths.append(deterministic_plan(config)[1])
    assert all(a >= b - 1e-9 for a, b in zip(wealths, wealths[1:]))


def test_plan_complementarity_enforced():
    with pytest.raises(ConfigError):
        TradePlan(buy=np.ones((2, 1)), sell=np.ones((2, 1)))
    netted = TradePlan.from_quantities(np.full((2, 1), 3.0), np.full((2, 1), 1.0))
    assert netted.buy == pytest.approx(np.full((2, 1), 2.0))
    assert netted.sell == pytest.approx(np.zeros((2, 1)))


# -- Monte Carlo evaluation ------------------------------------------------------


def test_zero_plan_statistics():
    config = MpaaConfig()
    plan = TradePlan(buy=np.zeros((10, 3)), sell=np.zeros((10, 3)))
    stats = evaluate_plan(plan, config, 64, RngStream(4, "eval"))
    assert stats.mean == pytest.approx(100.0)
    assert stats.std == pytest.approx(0.0)
    assert stats.min == pytest.approx(100.0)
    assert stats.histogram_counts.sum() == 64


def test_degenerate_prices_reproduce_plan_wealth():
    config = MpaaConfig(
        price_std=tuple(tuple(0.0 for _ in range(11)) for _ in range(3))
    )
    plan, wealth = deterministic_plan(config)
    stats = evaluate_plan(plan, config, 16, RngStream(7, "eval"))
    assert stats.mean == pytest.approx(wealth, rel=1e-9)
    assert stats.std == pytest.approx(0.0, abs=1e-9)


def test_evaluation_deterministic():
    config = MpaaConfig()
    plan, _ = deterministic_plan(config)
    a = evaluate_plan(plan, config, 50, RngStream(13, "eval"))
    b = evaluate_plan(plan, config, 50, RngStream(13, "eval"))
    assert a.mean == b.mean and a.std == b.std and a.min == b.min
    assert np.array_equal(a.wealths, b.wealths)
    assert a.min <= a.mean


def test_sample_price_paths_shape_and_floor():
    config = MpaaConfig()
    paths = sample_price_paths(config, 5, RngStream(3, "eval"))
    assert paths.shape == (5, 3, 11)
    assert np.all(paths >= 0.01)


# -- files -----------------------------------------------------------------------


def test_plan_file_round_trip(tmp_path):
    plan, _ = deterministic_plan(MpaaConfig())
    path = tmp_path / "plan.csv"
    save_plan(plan, path)
    again = load_plan(path)
    assert np.array_equal(plan.buy, again.buy)
    assert np.array_equal(plan.sell, again.sell)
    text = path.read_bytes()
    save_plan(again, path)
    assert path.read_bytes() == text


def test_plan_file_rejects_bad_header(tmp_path):
    path = tmp_path / "plan.csv"
    path.write_text("period,asset,qty\n0,0,1\n")
    with pytest.raises(ConfigError):
        load_plan(path)


def test_config_json_round_trip(tmp_path):
    config = MpaaConfig(horizon=6, trade_bound=500.0, price_growth=0.05)
    path = tmp_path / "mpaa.json"
    save_config(config, path)
    assert load_config(path) == config


def test_config_json_rejects_unknown_key(tmp_path):
    path = tmp_path / "mpaa.json"
    path.write_text('{"n_assets": 3, "fee_schedule": []}')
    with pytest.raises(ConfigError, match="fee_schedule"):
        load_config(path)


def test_config_validation():
    with pytest.raises(ConfigError):
        MpaaConfig(sale_cost=(0.01, 1.0, 0.01))
    with pytest.raises(ConfigError):
        MpaaConfig(trade_bound=0.0)
    with pytest.raises(ConfigError):
        MpaaConfig(initial_holdings=(0.0, 0.0))
    with pytest.raises(ConfigError):
        MpaaConfig(price_mean=((1.0, 2.0),))
