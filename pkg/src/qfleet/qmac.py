"""Quantum multi-agent actor-critic with centralized training.

One parameter-shared quantum policy acts for every robot from its local
observation; a quantum centralized critic values the ground-truth state.
Training follows the on-policy scheme: roll out one episode, form TD targets
against a periodically synced target critic, apply the multi-agent policy
gradient to the actor and the squared-TD gradient to the critic, then drop
the batch.

The trainer only touches the duck-typed actor/critic surface (``params``,
``distribution``/``logits_vjp``, ``value``/``value_vjp``, ``clone``), so the
classical comparison schemes plug into the same loop unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import vqc
from .env import FactoryEnv, FactoryState, critic_state_vector
from .vqc import CircuitLayout, NumericError, default_layout

INIT_ANGLE_SCALE = np.pi / 50  # near-identity start keeps early observables informative


class BatchError(ValueError):
    """Empty or malformed training batch."""


@dataclass(frozen=True)
class TrainConfig:
    """Learning constants; defaults follow the experiment table."""

    actor_lr: float = 1e-2
    critic_lr: float = 1e-3
    weight_decay: float = 1e-5
    discount: float = 0.99
    beta_actor: float = 3.0
    beta_critic: float = 35.0
    target_update_period: int = 10
    max_epochs: int = 500
    eval_episodes: int = 100

    def __post_init__(self):
        if self.actor_lr <= 0 or self.critic_lr <= 0:
            raise ValueError("learning rates must be positive")
        if not 0 <= self.discount < 1:
            raise ValueError("discount must be in [0, 1)")
        if self.target_update_period < 1:
            raise ValueError("target_update_period must be >= 1")


@dataclass(frozen=True)
class PolicyOutput:
    probabilities: np.ndarray
    logits: np.ndarray


def softmax(x: np.ndarray) -> np.ndarray:
    shifted = np.exp(x - np.max(x))
    return shifted / shifted.sum()


def select_action(dist: PolicyOutput, mode: str, rng=None) -> int:
    """Sample (training) or argmax (execution); argmax ties break low."""
    if mode == "greedy":
        return int(np.argmax(dist.probabilities))
    if mode == "sample":
        return int(rng.choice(dist.probabilities.size, p=dist.probabilities))
    raise ValueError(f"unknown selection mode {mode!r}")


def td_target(reward: float, v_next_target: float, v_current: float, discount: float) -> float:
    """y = r + gamma * V_target(s') - V(s); terminal steps pass v_next_target=0."""
    return reward + discount * v_next_target - v_current


def sync_target(critic_params: np.ndarray) -> np.ndarray:
    """Hard copy of the critic parameters for the target network."""
    return np.array(critic_params, dtype=np.float64, copy=True)


class Adam:
    """First/second-moment optimizer with bias correction and decoupled
    weight decay (params shrink by lr*decay before the moment step)."""

    def __init__(self, size, lr, weight_decay=0.0, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = np.zeros(size)
        self.v = np.zeros(size)

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(grad)):
            raise NumericError("non-finite gradient")
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad ** 2
        m_hat = self.m / (1 - self.beta1 ** self.t)
        v_hat = self.v / (1 - self.beta2 ** self.t)
        out = params * (1 - self.lr * self.weight_decay)
        return out - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class QuantumActor:
    """Parameter-shared policy: encode the observation with one RY per
    qubit, run the fixed template, softmax the scaled logit observables."""

    def __init__(self, layout: CircuitLayout, params: np.ndarray, beta: float):
        self.layout = layout
        self.params = np.asarray(params, dtype=np.float64)
        self.beta = beta

    @property
    def num_params(self) -> int:
        return self.layout.parameter_count

    def encode(self, obs) -> "vqc.StateVector":
        return vqc.encode_actor_observation(np.asarray(obs) * np.pi, self.layout.num_qubits)

    def distribution(self, obs) -> PolicyOutput:
        observables = vqc.evaluate_observables(self.layout, self.params, self.encode(obs))
        if not np.all(np.isfinite(observables)):
            raise NumericError("non-finite actor observables")
        logits = self.beta * observables
        return PolicyOutput(softmax(logits), logits)

    def logits_vjp(self, obs, upstream) -> np.ndarray:
        """d(upstream . logits)/d(params) via the parameter-shift rule."""
        return vqc.parameter_shift_gradient(
            self.layout, self.params, self.encode(obs), self.beta * np.asarray(upstream)
        )

    def clone(self) -> "QuantumActor":
        return QuantumActor(self.layout, self.params.copy(), self.beta)


class QuantumCritic:
    """Centralized state-value head: two-variable dense state encoding, the
    fixed template, one scaled <Z> readout. |V| <= beta by construction."""

    def __init__(self, layout: CircuitLayout, params: np.ndarray, beta: float):
        self.layout = layout
        self.params = np.asarray(params, dtype=np.float64)
        self.beta = beta

    @property
    def num_params(self) -> int:
        return self.layout.parameter_count

    def encode(self, state_vec) -> "vqc.StateVector":
        return vqc.encode_critic_state(np.asarray(state_vec) * np.pi, self.layout.num_qubits)

    def value(self, state_vec, params=None) -> float:
        params = self.params if params is None else params
        obs = vqc.evaluate_observables(self.layout, params, self.encode(state_vec))
        return float(self.beta * obs[0])

    def value_vjp(self, state_vec, upstream: float) -> np.ndarray:
        return vqc.parameter_shift_gradient(
            self.layout, self.params, self.encode(state_vec), np.array([self.beta * upstream])
        )

    def clone(self) -> "QuantumCritic":
        return QuantumCritic(self.layout, self.params.copy(), self.beta)


def actor_layout_for(num_actions: int) -> CircuitLayout:
    """The default actor template, measuring one logit wire per action."""
    layout = default_layout("actor")
    if num_actions == len(layout.measured_wires):
        return layout
    if num_actions > layout.num_qubits:
        raise vqc.LayoutError(
            f"{num_actions} actions exceed the {layout.num_qubits}-qubit register"
        )
    return vqc.layered_layout(
        layout.num_qubits, layout.parameter_count, tuple(range(num_actions))
    )


def build_quantum_agents(env_config, train_config: TrainConfig, rng):
    """Default actor/critic pair with near-identity initial angles."""
    actor_layout = actor_layout_for(env_config.num_actions)
    critic_layout = default_layout("critic")
    if env_config.observation_dim > actor_layout.num_qubits:
        raise vqc.EncodingError("observation does not fit the actor register")
    if env_config.state_dim > 2 * critic_layout.num_qubits:
        raise vqc.EncodingError("state does not fit the critic register")
    actor = QuantumActor(
        actor_layout,
        rng.uniform(-INIT_ANGLE_SCALE, INIT_ANGLE_SCALE, actor_layout.parameter_count),
        train_config.beta_actor,
    )
    critic = QuantumCritic(
        critic_layout,
        rng.uniform(-INIT_ANGLE_SCALE, INIT_ANGLE_SCALE, critic_layout.parameter_count),
        train_config.beta_critic,
    )
    return actor, critic


@dataclass(frozen=True)
class Transition:
    state_vec: np.ndarray
    observations: list
    actions: np.ndarray
    reward: float
    next_state_vec: np.ndarray
    terminal: bool


@dataclass(frozen=True)
class EpisodeStats:
    """Episode-level metric aggregates (means over steps, mass totals)."""

    total_reward: float
    precision_pct: float
    processing_minutes: float
    avg_load_amr: float
    avg_load_warehouse: float
    overflow_amr: float
    overflow_warehouse: float
    underflow_amr: float
    underflow_warehouse: float


def rollout(env: FactoryEnv, actor, rng, mode: str = "sample"):
    """Play one episode; returns (transitions, EpisodeStats)."""
    cfg = env.config
    state, observations = env.reset(rng)
    transitions = []
    step_metrics = []
    total_reward = 0.0
    done = False
    while not done:
        actions = np.array(
            [
                select_action(actor.distribution(observations[n]), mode, rng)
                for n in range(cfg.num_agents)
            ],
            dtype=np.int64,
        )
        outcome = env.step(state, actions, rng)
        transitions.append(
            Transition(
                state_vec=critic_state_vector(cfg, state),
                observations=observations,
                actions=actions,
                reward=outcome.reward,
                next_state_vec=critic_state_vector(cfg, outcome.state),
                terminal=outcome.done,
            )
        )
        total_reward += outcome.reward
        step_metrics.append(outcome.metrics)
        state, observations, done = outcome.state, outcome.observations, outcome.done
    stats = EpisodeStats(
        total_reward=total_reward,
        precision_pct=float(np.mean([m.precision_pct for m in step_metrics])),
        processing_minutes=float(np.sum([m.processing_minutes for m in step_metrics])),
        avg_load_amr=float(np.mean([m.avg_load_amr for m in step_metrics])),
        avg_load_warehouse=float(np.mean([m.avg_load_warehouse for m in step_metrics])),
        overflow_amr=float(np.sum([m.overflow_amr for m in step_metrics])),
        overflow_warehouse=float(np.sum([m.overflow_warehouse for m in step_metrics])),
        underflow_amr=float(np.sum([m.underflow_amr for m in step_metrics])),
        underflow_warehouse=float(np.sum([m.underflow_warehouse for m in step_metrics])),
    )
    return transitions, stats


def actor_loss_gradient(transitions, targets, actor) -> np.ndarray:
    """Gradient of -(1/T) sum_t sum_n y_t log pi(a_t^n | z_t^n).

    The targets are treated as constants; the log-softmax derivative is
    chained in closed form, the logit Jacobian via the parameter shift.
    """
    if not transitions:
        raise BatchError("empty batch")
    horizon = len(transitions)
    grad = np.zeros(actor.num_params)
    for tr, y in zip(transitions, targets):
        for n, action in enumerate(tr.actions):
            obs = tr.observations[n]
            probs = actor.distribution(obs).probabilities
            upstream = probs.copy()
            upstream[action] -= 1.0  # -(e_a - p)
            grad += actor.logits_vjp(obs, (y / horizon) * upstream)
    return grad


def critic_loss_gradient(transitions, targets, critic) -> np.ndarray:
    """Gradient of (1/T) sum_t y_t^2 w.r.t. the critic parameters, with
    y_t = r + gamma V_target(s') - V(s): each term contributes -2 y_t dV/dphi."""
    if not transitions:
        raise BatchError("empty batch")
    horizon = len(transitions)
    grad = np.zeros(critic.num_params)
    for tr, y in zip(transitions, targets):
        grad += critic.value_vjp(tr.state_vec, -2.0 * y / horizon)
    return grad


def compute_targets(transitions, critic, target_params, discount) -> np.ndarray:
    """TD targets per timestep; terminal bootstrap value is 0."""
    targets = np.empty(len(transitions))
    for i, tr in enumerate(transitions):
        v_next = 0.0 if tr.terminal else critic.value(tr.next_state_vec, target_params)
        targets[i] = td_target(tr.reward, v_next, critic.value(tr.state_vec), discount)
    return targets


@dataclass
class TrainResult:
    history: list = field(default_factory=list)  # EpisodeStats per epoch
    actor: object = None
    critic: object = None


def train(env: FactoryEnv, actor, critic, config: TrainConfig, rng, epoch_callback=None) -> TrainResult:
    """On-policy loop: one episode per epoch, fresh batch each update.

    A critic of None (and an actor with no parameters) turns the loop into
    rollout-only metric collection, which is how the random-walk scheme runs.
    """
    result = TrainResult(actor=actor, critic=critic)
    trainable = actor.num_params > 0 and critic is not None
    if trainable:
        target_params = sync_target(critic.params)
        actor_opt = Adam(actor.num_params, config.actor_lr, config.weight_decay)
        critic_opt = Adam(critic.num_params, config.critic_lr, config.weight_decay)
    for epoch in range(config.max_epochs):
        transitions, stats = rollout(env, actor, rng, mode="sample")
        result.history.append(stats)
        if trainable:
            targets = compute_targets(transitions, critic, target_params, config.discount)
            actor_grad = actor_loss_gradient(transitions, targets, actor)
            critic_grad = critic_loss_gradient(transitions, targets, critic)
            actor.params = actor_opt.step(actor.params, actor_grad)
            critic.params = critic_opt.step(critic.params, critic_grad)
            if (epoch + 1) % config.target_update_period == 0:
                target_params = sync_target(critic.params)
        if epoch_callback is not None:
            epoch_callback(epoch, stats)
        transitions = None  # on-policy: nothing outlives the update
    return result


def greedy_evaluation(env: FactoryEnv, actor, rng, episodes: int):
    """Execution-mode rollouts (argmax for trained policies, sampling for
    policies that declare it); returns one EpisodeStats per episode."""
    mode = getattr(actor, "execution_mode", "greedy")
    return [rollout(env, actor, rng, mode=mode)[1] for _ in range(episodes)]
