"""From-scratch Q-network agents: MLP forward/backward, Adam, replay memory.

The network regresses action values from the normalized per-user
(actual rate, target rate) vector. Targets are bootstrapped from the same
online network that is being trained; there is no separate target network.
Everything is plain numpy so runs are bitwise reproducible from seeds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from rfvlc.tabular import epsilon


def build_state_vector(
    actual: Sequence[float], targets: Sequence[float], norm: float
) -> np.ndarray:
    """Interleave [R(1), T(1), ..., R(N), T(N)] and scale by a fixed constant."""
    if len(actual) != len(targets):
        raise ValueError("rate and target vectors must have equal length")
    if norm <= 0.0:
        raise ValueError("normalization constant must be positive")
    out = np.empty(2 * len(actual))
    out[0::2] = actual
    out[1::2] = targets
    out /= norm
    return out


class MlpParams:
    """Weights and biases of a fully-connected ReLU network (identity output)."""

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        if len(weights) != len(biases):
            raise ValueError("need one bias vector per weight matrix")
        for w, b in zip(weights, biases):
            if w.shape[1] != b.shape[0]:
                raise ValueError(f"bias shape {b.shape} does not match weight {w.shape}")
        self.weights = weights
        self.biases = biases

    @classmethod
    def init_random(cls, topology: Sequence[int], rng: np.random.Generator) -> "MlpParams":
        """Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer."""
        weights, biases = [], []
        for fan_in, fan_out in zip(topology[:-1], topology[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(weights, biases)

    @property
    def topology(self) -> tuple[int, ...]:
        return tuple([self.weights[0].shape[0]] + [w.shape[1] for w in self.weights])

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def mlp_forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Action-value vector(s) for one input or a batch of inputs."""
    single = x.ndim == 1
    a = np.atleast_2d(x)
    if a.shape[1] != params.weights[0].shape[0]:
        raise ValueError(
            f"input width {a.shape[1]} does not match network input {params.weights[0].shape[0]}"
        )
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        a = a @ w + b
        if i < last:
            np.maximum(a, 0.0, out=a)
    return a[0] if single else a


def _forward_cached(params: MlpParams, x: np.ndarray) -> tuple[np.ndarray, list, list]:
    """Forward pass keeping pre-activations and activations for backprop."""
    zs, acts = [], [x]
    a = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w + b
        zs.append(z)
        a = np.maximum(z, 0.0) if i < last else z
        acts.append(a)
    return a, zs, acts


@dataclass
class Transition:
    """One (state, action, reward, next state) experience record."""

    state: np.ndarray
    action_index: int
    reward: float
    next_state: np.ndarray


class ReplayBuffer:
    """Fixed-capacity FIFO memory of transitions with uniform sampling."""

    def __init__(self, capacity: int, state_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.states = np.empty((capacity, state_dim))
        self.actions = np.empty(capacity, dtype=np.int64)
        self.rewards = np.empty(capacity)
        self.next_states = np.empty((capacity, state_dim))
        self.size = 0
        self._cursor = 0

    def __len__(self) -> int:
        return self.size

    def push(self, t: Transition) -> None:
        i = self._cursor
        self.states[i] = t.state
        self.actions[i] = t.action_index
        self.rewards[i] = t.reward
        self.next_states[i] = t.next_state
        self._cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample_indices(self, k: int, rng: np.random.Generator) -> np.ndarray:
        """k uniform draws with replacement over the stored transitions."""
        if self.size == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        return rng.integers(self.size, size=k)


def replay_push(buf: ReplayBuffer, t: Transition) -> None:
    buf.push(t)


def sample_minibatch(buf: ReplayBuffer, k: int, rng: np.random.Generator) -> list[Transition]:
    idx = buf.sample_indices(k, rng)
    return [
        Transition(buf.states[i].copy(), int(buf.actions[i]), float(buf.rewards[i]), buf.next_states[i].copy())
        for i in idx
    ]


@dataclass
class AdamState:
    """First/second moment accumulators and constants of the Adam optimizer."""

    first_moment: list[np.ndarray]
    second_moment: list[np.ndarray]
    step_count: int
    learning_rate: float
    beta1: float
    beta2: float
    epsilon_hat: float

    @classmethod
    def for_params(
        cls,
        params: MlpParams,
        learning_rate: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon_hat: float = 1e-8,
    ) -> "AdamState":
        tensors = params.weights + params.biases
        return cls(
            first_moment=[np.zeros_like(t) for t in tensors],
            second_moment=[np.zeros_like(t) for t in tensors],
            step_count=0,
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            epsilon_hat=epsilon_hat,
        )


def adam_step(params: MlpParams, grads: list[np.ndarray], state: AdamState) -> None:
    """One bias-corrected Adam update, in place; zero grads leave params fixed."""
    tensors = params.weights + params.biases
    if len(grads) != len(tensors):
        raise ValueError("gradient list does not match parameter tensors")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for theta, g, m, v in zip(tensors, grads, state.first_moment, state.second_moment):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        theta -= state.learning_rate * (m / c1) / (np.sqrt(v / c2) + state.epsilon_hat)


def td_targets(
    states_next: np.ndarray, rewards: np.ndarray, params: MlpParams, discount: float
) -> np.ndarray:
    """Bootstrap targets r + gamma * max_a Q(s', a) from the online network."""
    q_next = mlp_forward(params, states_next)
    return rewards + discount * q_next.max(axis=1)


def mse_grad(
    params: MlpParams,
    states: np.ndarray,
    actions: np.ndarray,
    targets: np.ndarray,
) -> tuple[list[np.ndarray], float]:
    """Gradients of the half-squared TD error, averaged over the batch.

    Only the taken action's output contributes per sample; targets are
    treated as constants. Returns (grads ordered like weights + biases,
    pre-update batch loss).
    """
    k = states.shape[0]
    q_all, zs, acts = _forward_cached(params, states)
    rows = np.arange(k)
    residual = targets - q_all[rows, actions]
    loss = float(0.5 * np.mean(residual**2))

    d_out = np.zeros_like(q_all)
    d_out[rows, actions] = -residual / k

    n_layers = len(params.weights)
    w_grads: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    b_grads: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    delta = d_out
    for i in range(n_layers - 1, -1, -1):
        w_grads[i] = acts[i].T @ delta
        b_grads[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * (zs[i - 1] > 0.0)
    return w_grads + b_grads, loss


def dqn_select_action(
    params: MlpParams, state_vec: np.ndarray, eps: float, rng: np.random.Generator
) -> int:
    """Epsilon-greedy over the network's action values; ties to lowest index."""
    if rng.random() < eps:
        return int(rng.integers(params.weights[-1].shape[1]))
    return int(np.argmax(mlp_forward(params, state_vec)))


class DqnAgent:
    """One AP's Q-network learner; sees only the shared state and reward."""

    def __init__(
        self,
        state_dim: int,
        n_actions: int,
        discount: float,
        rng: np.random.Generator,
        hidden: Sequence[int] = (32, 32, 32),
        learning_rate: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon_hat: float = 1e-8,
        replay_capacity: int = 10_000,
        batch_size: int = 32,
    ):
        self.n_actions = n_actions
        self.discount = discount
        self.batch_size = batch_size
        self.rng = rng
        self.params = MlpParams.init_random([state_dim, *hidden, n_actions], rng)
        self.adam = AdamState.for_params(self.params, learning_rate, beta1, beta2, epsilon_hat)
        self.buffer = ReplayBuffer(replay_capacity, state_dim)
        self.last_loss: float | None = None

    def act(self, state_vec: np.ndarray, t: int) -> int:
        return dqn_select_action(self.params, state_vec, epsilon(t), self.rng)

    def observe(self, state_vec: np.ndarray, action: int, reward: float, next_state_vec: np.ndarray) -> None:
        """Store the transition; train one minibatch once enough are held."""
        self.buffer.push(Transition(state_vec, action, reward, next_state_vec))
        if self.buffer.size >= self.batch_size:
            idx = self.buffer.sample_indices(self.batch_size, self.rng)
            self.last_loss = self.train_on_batch(
                self.buffer.states[idx],
                self.buffer.actions[idx],
                self.buffer.rewards[idx],
                self.buffer.next_states[idx],
            )

    def train_on_batch(
        self,
        states: np.ndarray,
        actions: np.ndarray,
        rewards: np.ndarray,
        next_states: np.ndarray,
    ) -> float:
        targets = td_targets(next_states, rewards, self.params, self.discount)
        grads, loss = mse_grad(self.params, states, actions, targets)
        adam_step(self.params, grads, self.adam)
        return loss

    def save_weights(self, path: str, seed: int | None = None) -> None:
        """Snapshot the network as text: a header plus one line per tensor."""
        p = self.params
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            topo = ",".join(str(d) for d in p.topology)
            fh.write(f"# qnet-snapshot topology={topo} seed={seed}\n")
            for name, tensor in self._named_tensors():
                flat = ",".join(repr(float(v)) for v in tensor.ravel())
                shape = "x".join(str(d) for d in tensor.shape)
                fh.write(f"{name};{shape};{flat}\n")

    def load_weights(self, path: str) -> None:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
        named = dict(self._named_tensors())
        if len(lines) != len(named):
            raise ValueError(f"snapshot has {len(lines)} tensors, expected {len(named)}")
        for line in lines:
            name, shape_s, flat = line.split(";", 2)
            shape = tuple(int(d) for d in shape_s.split("x"))
            values = np.array([float(v) for v in flat.split(",")]).reshape(shape)
            if name not in named or named[name].shape != shape:
                raise ValueError(f"unexpected tensor {name} with shape {shape}")
            named[name][...] = values

    def _named_tensors(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, w in enumerate(self.params.weights):
            out.append((f"W{i}", w))
        for i, b in enumerate(self.params.biases):
            out.append((f"b{i}", b))
        return out


def dqn_train_step(agent: DqnAgent, minibatch: Sequence[Transition]) -> float:
    """Train on an explicit list of transitions; returns the pre-update loss."""
    if not minibatch:
        raise ValueError("minibatch must not be empty")
    states = np.stack([t.state for t in minibatch])
    actions = np.array([t.action_index for t in minibatch], dtype=np.int64)
    rewards = np.array([t.reward for t in minibatch])
    next_states = np.stack([t.next_state for t in minibatch])
    return agent.train_on_batch(states, actions, rewards, next_states)
