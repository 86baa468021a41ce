"""Classical comparison schemes at matched parameter budgets.

comp1: quantum actor + small classical critic (hybrid), sized to the quantum
       budget.
comp2: small classical actor-critic at the quantum budget.
comp3: large classical actor-critic (~40k parameters).
comp4: uniform random walk, nothing trainable.

Networks are plain affine/activation stacks with hand-written reverse-mode
gradients; every scheme exposes the same policy/value surface the trainer
uses, so the training loop is scheme-agnostic.
"""
from __future__ import annotations

import numpy as np

from .qmac import PolicyOutput, QuantumActor, softmax
from .vqc import default_layout

SCHEMES = ("proposed", "comp1", "comp2", "comp3", "comp4")

_ACTIVATIONS = {
    "relu": (lambda z: np.maximum(z, 0.0), lambda z: (z > 0).astype(float)),
    "tanh": (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
    "identity": (lambda z: z, lambda z: np.ones_like(z)),
}


class DenseNet:
    """Affine/activation stack with exact manual gradients.

    ``sizes`` has len(activations)+1 entries; layer i maps sizes[i] ->
    sizes[i+1] and applies activations[i].
    """

    def __init__(self, sizes, activations, rng):
        if len(activations) != len(sizes) - 1:
            raise ValueError("need one activation per layer")
        for name in activations:
            if name not in _ACTIVATIONS:
                raise ValueError(f"unknown activation {name!r}")
        self.sizes = tuple(sizes)
        self.activations = tuple(activations)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, (fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out))

    @property
    def num_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def get_params(self) -> np.ndarray:
        return np.concatenate(
            [np.concatenate([w.ravel(), b]) for w, b in zip(self.weights, self.biases)]
        )

    def set_params(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self.num_params:
            raise ValueError(f"expected {self.num_params} parameters, got {flat.size}")
        pos = 0
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[i] = flat[pos : pos + w.size].reshape(w.shape).copy()
            pos += w.size
            self.biases[i] = flat[pos : pos + b.size].copy()
            pos += b.size

    def forward(self, x):
        """Output plus the cache needed for the backward pass."""
        x = np.asarray(x, dtype=np.float64)
        if x.size != self.sizes[0]:
            raise ValueError(f"expected input of size {self.sizes[0]}, got {x.size}")
        inputs, pre = [x], []
        for w, b, name in zip(self.weights, self.biases, self.activations):
            z = w @ inputs[-1] + b
            pre.append(z)
            inputs.append(_ACTIVATIONS[name][0](z))
        return inputs[-1], (inputs, pre)

    def backward(self, cache, upstream) -> np.ndarray:
        """d(upstream . output)/d(params), flattened in parameter order."""
        inputs, pre = cache
        delta = np.asarray(upstream, dtype=np.float64)
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        for i in reversed(range(len(self.weights))):
            delta = delta * _ACTIVATIONS[self.activations[i]][1](pre[i])
            grads_w[i] = np.outer(delta, inputs[i])
            grads_b[i] = delta
            delta = self.weights[i].T @ delta
        return np.concatenate(
            [np.concatenate([w.ravel(), b]) for w, b in zip(grads_w, grads_b)]
        )


class ClassicalActor:
    """Dense policy head; raw network outputs are the action logits."""

    def __init__(self, net: DenseNet):
        self.net = net

    @property
    def num_params(self) -> int:
        return self.net.num_params

    @property
    def params(self) -> np.ndarray:
        return self.net.get_params()

    @params.setter
    def params(self, flat) -> None:
        self.net.set_params(flat)

    def distribution(self, obs) -> PolicyOutput:
        logits, _ = self.net.forward(obs)
        return PolicyOutput(softmax(logits), logits)

    def logits_vjp(self, obs, upstream) -> np.ndarray:
        _, cache = self.net.forward(obs)
        return self.net.backward(cache, upstream)

    def clone(self) -> "ClassicalActor":
        twin = DenseNet(self.net.sizes, self.net.activations, np.random.default_rng(0))
        twin.set_params(self.net.get_params())
        return ClassicalActor(twin)


class ClassicalCritic:
    """Dense scalar value head (tanh hidden layers keep it well-bounded)."""

    def __init__(self, net: DenseNet):
        self.net = net

    @property
    def num_params(self) -> int:
        return self.net.num_params

    @property
    def params(self) -> np.ndarray:
        return self.net.get_params()

    @params.setter
    def params(self, flat) -> None:
        self.net.set_params(flat)

    def value(self, state_vec, params=None) -> float:
        if params is None:
            out, _ = self.net.forward(state_vec)
            return float(out[0])
        saved = self.net.get_params()
        self.net.set_params(params)
        out, _ = self.net.forward(state_vec)
        self.net.set_params(saved)
        return float(out[0])

    def value_vjp(self, state_vec, upstream: float) -> np.ndarray:
        _, cache = self.net.forward(state_vec)
        return self.net.backward(cache, np.array([upstream]))

    def clone(self) -> "ClassicalCritic":
        twin = DenseNet(self.net.sizes, self.net.activations, np.random.default_rng(0))
        twin.set_params(self.net.get_params())
        return ClassicalCritic(twin)


class RandomWalkPolicy:
    """Uniform over the action catalog, independent of the observation.

    Executes by sampling even during evaluation: the argmax of a uniform
    distribution would pin it to one action, which is not a random walk.
    """

    execution_mode = "sample"

    def __init__(self, num_actions: int):
        self.num_actions = num_actions

    @property
    def num_params(self) -> int:
        return 0

    @property
    def params(self) -> np.ndarray:
        return np.zeros(0)

    def distribution(self, obs) -> PolicyOutput:
        p = np.full(self.num_actions, 1.0 / self.num_actions)
        return PolicyOutput(p, np.zeros(self.num_actions))

    def clone(self) -> "RandomWalkPolicy":
        return RandomWalkPolicy(self.num_actions)


def _actor_param_count(obs_dim, hidden, num_actions):
    return hidden * (obs_dim + 1) + num_actions * (hidden + 1)


def _critic_param_count(state_dim, hidden):
    return hidden * (state_dim + 1) + hidden + 1


def _solve_pair_budget(obs_dim, num_actions, state_dim, target):
    """Hidden widths (actor, critic) whose total parameter count lands
    closest to the target budget."""
    best = None
    for h in range(1, 33):
        for k in range(1, 33):
            total = _actor_param_count(obs_dim, h, num_actions) + _critic_param_count(state_dim, k)
            key = (abs(total - target), -h, -k)
            if best is None or key < best[0]:
                best = (key, h, k)
    return best[1], best[2]


def _solve_wide_budget(obs_dim, num_actions, state_dim, target):
    """Split a large budget roughly half/half between actor and critic."""
    h = max(1, round((target / 2) / (obs_dim + 1 + num_actions)))
    k = max(1, round((target / 2) / (state_dim + 2)))
    return h, k


def build_baseline(scheme: str, env_config, train_config, rng):
    """(actor, critic) for a comparison scheme; critic is None for comp4.

    Budgets track the quantum pair's trainable-angle count so the schemes
    stay parameter-matched.
    """
    obs_dim = env_config.observation_dim
    state_dim = env_config.state_dim
    num_actions = env_config.num_actions
    quantum_budget = 2 * default_layout("actor").parameter_count

    if scheme == "comp4":
        return RandomWalkPolicy(num_actions), None
    if scheme == "comp1":
        from .qmac import actor_layout_for

        actor_layout = actor_layout_for(num_actions)
        actor = QuantumActor(
            actor_layout,
            rng.uniform(-np.pi / 50, np.pi / 50, actor_layout.parameter_count),
            train_config.beta_actor,
        )
        remaining = quantum_budget - actor_layout.parameter_count
        k = max(1, round((remaining - 1) / (state_dim + 2)))
        critic = ClassicalCritic(DenseNet((state_dim, k, 1), ("tanh", "identity"), rng))
        return actor, critic
    if scheme == "comp2":
        h, k = _solve_pair_budget(obs_dim, num_actions, state_dim, quantum_budget)
    elif scheme == "comp3":
        h, k = _solve_wide_budget(obs_dim, num_actions, state_dim, 40_000)
    else:
        raise ValueError(f"unknown baseline scheme {scheme!r}")
    actor = ClassicalActor(DenseNet((obs_dim, h, num_actions), ("relu", "identity"), rng))
    critic = ClassicalCritic(DenseNet((state_dim, k, 1), ("tanh", "identity"), rng))
    return actor, critic
