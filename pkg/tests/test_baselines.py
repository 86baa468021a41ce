"""Baseline-scheme tests: dense-net gradients, parameter budgets, random-walk
statistics, and plug compatibility with the shared training loop."""
import numpy as np
import pytest

from qfleet.baselines import (
    ClassicalActor,
    ClassicalCritic,
    DenseNet,
    RandomWalkPolicy,
    build_baseline,
)
from qfleet.env import FactoryConfig, FactoryEnv
from qfleet.qmac import TrainConfig, greedy_evaluation, select_action, train
from qfleet.qmac import QuantumActor

import reference


# --- dense networks ---------------------------------------------------------------


def test_forward_zero_network():
    net = DenseNet((3, 2), ("identity",), np.random.default_rng(0))
    net.set_params(np.zeros(net.num_params))
    out, _ = net.forward([1.0, -2.0, 3.0])
    assert np.allclose(out, 0.0)


def test_forward_affine():
    net = DenseNet((1, 1), ("identity",), np.random.default_rng(0))
    net.set_params(np.array([2.0, 1.0]))  # weight 2, bias 1
    out, _ = net.forward([3.0])
    assert out[0] == 7.0


def test_relu_clamps():
    net = DenseNet((2, 2), ("relu",), np.random.default_rng(0))
    net.set_params(np.array([1.0, 0.0, 0.0, 1.0, 0.0, 0.0]))  # identity weights
    out, _ = net.forward([-1.0, 2.0])
    assert np.allclose(out, [0.0, 2.0])


def test_backward_zero_upstream():
    net = DenseNet((3, 4, 2), ("tanh", "identity"), np.random.default_rng(1))
    _, cache = net.forward([0.1, 0.2, 0.3])
    grads = net.backward(cache, np.zeros(2))
    assert np.allclose(grads, 0.0)


def test_backward_single_linear_layer_outer_product():
    net = DenseNet((3, 2), ("identity",), np.random.default_rng(2))
    x = np.array([0.5, -1.0, 2.0])
    upstream = np.array([1.0, -2.0])
    _, cache = net.forward(x)
    grads = net.backward(cache, upstream)
    expected_w = np.outer(upstream, x).ravel()
    assert np.allclose(grads[:6], expected_w)
    assert np.allclose(grads[6:], upstream)


def test_backward_matches_finite_differences():
    rng = np.random.default_rng(3)
    net = DenseNet((4, 5, 3), ("relu", "tanh"), rng)
    x = rng.uniform(-1, 1, 4)
    upstream = rng.uniform(-1, 1, 3)

    def loss(flat):
        probe = DenseNet(net.sizes, net.activations, np.random.default_rng(0))
        probe.set_params(flat)
        out, _ = probe.forward(x)
        return float(upstream @ out)

    _, cache = net.forward(x)
    analytic = net.backward(cache, upstream)
    numeric = reference.central_difference(loss, net.get_params(), h=1e-5)
    assert np.max(np.abs(analytic - numeric)) < 1e-6


def test_param_round_trip():
    net = DenseNet((3, 4, 2), ("relu", "identity"), np.random.default_rng(4))
    flat = net.get_params()
    net.set_params(flat * 2)
    assert np.allclose(net.get_params(), flat * 2)
    with pytest.raises(ValueError):
        net.set_params(np.zeros(3))


# --- budgets ---------------------------------------------------------------------


def _counts(scheme):
    cfg = FactoryConfig()
    actor, critic = build_baseline(scheme, cfg, TrainConfig(), np.random.default_rng(0))
    critic_params = 0 if critic is None else critic.num_params
    return actor.num_params, critic_params


def test_comp2_budget():
    actor, critic = _counts("comp2")
    total = actor + critic
    assert 99 <= total <= 121
    assert abs(total - 108) <= 0.1 * 108  # parity with the quantum pair


def test_comp3_budget():
    actor, critic = _counts("comp3")
    assert 36_000 <= actor + critic <= 44_000


def test_comp1_is_hybrid_at_budget():
    cfg = FactoryConfig()
    actor, critic = build_baseline("comp1", cfg, TrainConfig(), np.random.default_rng(0))
    assert isinstance(actor, QuantumActor)
    assert isinstance(critic, ClassicalCritic)
    total = actor.num_params + critic.num_params
    assert abs(total - 108) <= 0.1 * 108


def test_comp4_has_nothing_trainable():
    actor, critic = build_baseline("comp4", FactoryConfig(), TrainConfig(), np.random.default_rng(0))
    assert actor.num_params == 0
    assert critic is None


def test_unknown_scheme_rejected():
    with pytest.raises(ValueError):
        build_baseline("comp9", FactoryConfig(), TrainConfig(), np.random.default_rng(0))


# --- random walk -------------------------------------------------------------------


def test_random_walk_uniform_distribution():
    policy = RandomWalkPolicy(5)
    dist = policy.distribution(np.zeros(6))
    assert np.allclose(dist.probabilities, 0.2)


def test_random_walk_empirical_frequencies():
    policy = RandomWalkPolicy(5)
    rng = np.random.default_rng(17)
    draws = np.array(
        [select_action(policy.distribution(None), "sample", rng) for _ in range(100_000)]
    )
    freqs = np.bincount(draws, minlength=5) / draws.size
    assert np.all(np.abs(freqs - 0.2) < 0.01)


def test_random_walk_ignores_observation():
    policy = RandomWalkPolicy(5)
    a = policy.distribution(np.zeros(6)).probabilities
    b = policy.distribution(np.full(6, 0.7)).probabilities
    assert np.array_equal(a, b)


def test_random_walk_seed_reproducible():
    policy = RandomWalkPolicy(5)
    a = [select_action(policy.distribution(None), "sample", np.random.default_rng(1)) for _ in range(5)]
    b = [select_action(policy.distribution(None), "sample", np.random.default_rng(1)) for _ in range(5)]
    assert a == b


def test_random_walk_samples_at_execution():
    # evaluation must not collapse the uniform policy onto one action
    cfg = FactoryConfig(num_agents=2, episode_length=10)
    env = FactoryEnv(cfg)
    policy, _ = build_baseline("comp4", cfg, TrainConfig(), np.random.default_rng(0))
    stats = greedy_evaluation(env, policy, np.random.default_rng(0), 3)
    rewards = [s.total_reward for s in stats]
    assert len(set(rewards)) > 1


# --- plug compatibility ---------------------------------------------------------------


@pytest.mark.parametrize("scheme", ["comp1", "comp2", "comp3", "comp4"])
def test_schemes_run_in_shared_train_loop(scheme):
    cfg = FactoryConfig(num_agents=2, num_sites=2, episode_length=4, warehouse_outflow=30.0)
    env = FactoryEnv(cfg)
    tc = TrainConfig(max_epochs=2, eval_episodes=1, target_update_period=1)
    actor, critic = build_baseline(scheme, cfg, tc, np.random.default_rng(5))
    result = train(env, actor, critic, tc, np.random.default_rng(6))
    assert len(result.history) == 2
    dist = actor.distribution(np.zeros(cfg.observation_dim))
    assert abs(dist.probabilities.sum() - 1.0) < 1e-9
    if critic is not None:
        assert np.isfinite(critic.value(np.zeros(cfg.state_dim)))
