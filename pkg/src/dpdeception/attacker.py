"""Attacker strategies.

Two attackers are modelled. The Bayesian attacker turns its scan and the
feedback from earlier attacks into a posterior over real configurations
behind each displayed label, then picks a label epsilon-greedily. The value
attacker ignores the scan and learns action values from its own recent
history with a small Q-network trained from a replay buffer.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class AttackerBelief:
    """Static prior knowledge plus feedback tallies.

    ``obfuscation_counts[k, k']`` counts attacked genuine hosts that really
    run ``k`` and were displayed as ``k'``.
    """

    prior_counts: tuple[int, ...]
    utilities: tuple[float, ...]
    obfuscation_counts: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        K = len(self.prior_counts)
        if len(self.utilities) != K:
            raise ValueError("prior_counts and utilities must have the same length")
        if self.obfuscation_counts is None:
            object.__setattr__(self, "obfuscation_counts", np.zeros((K, K), dtype=np.int64))

    @classmethod
    def from_network(cls, net) -> "AttackerBelief":
        return cls(tuple(net.real_counts), tuple(net.catalog.utilities))

    @property
    def num_configs(self) -> int:
        return len(self.prior_counts)

    @property
    def total_feedback_per_k(self) -> np.ndarray:
        return self.obfuscation_counts.sum(axis=1)

    def display_likelihood(self) -> np.ndarray:
        """Matrix of ``q(k' | k)``; rows without feedback are uniform."""
        K = self.num_configs
        totals = self.total_feedback_per_k
        out = np.full((K, K), 1.0 / K)
        seen = totals > 0
        out[seen] = self.obfuscation_counts[seen] / totals[seen, None]
        return out


def posterior_matrix(belief: AttackerBelief, observed: Sequence[int]) -> np.ndarray:
    """``q(k | k')`` for every pair, indexed ``[k, k']``.

    Values are the raw ratio ``q(k) q(k'|k) / q(k')`` and need not sum to one
    over ``k``. Empty observed buckets get an all-zero column.
    """
    observed = np.asarray(observed, dtype=float)
    prior = np.asarray(belief.prior_counts, dtype=float)
    q_k = prior / prior.sum()
    total_obs = observed.sum()
    post = np.zeros((belief.num_configs, belief.num_configs))
    if total_obs <= 0:
        return post
    q_obs = observed / total_obs
    nonempty = q_obs > 0
    post[:, nonempty] = q_k[:, None] * belief.display_likelihood()[:, nonempty] / q_obs[nonempty]
    return post


def bayes_posterior(belief: AttackerBelief, observed: Sequence[int], displayed_k_prime: int) -> np.ndarray:
    return posterior_matrix(belief, observed)[:, displayed_k_prime]


def expected_gains(belief: AttackerBelief, observed: Sequence[int]) -> np.ndarray:
    """Per-label expected gain ``sum_k q(k|k') u_k``."""
    return np.asarray(belief.utilities) @ posterior_matrix(belief, observed)


def record_feedback(belief: AttackerBelief, attacked: Iterable[tuple[int, int]]) -> AttackerBelief:
    """Fold in ``(displayed k', real k)`` pairs from attacked genuine hosts."""
    counts = belief.obfuscation_counts.copy()
    for shown, real in attacked:
        counts[real, shown] += 1
    return replace(belief, obfuscation_counts=counts)


@dataclass(frozen=True)
class SelectionPolicy:
    exploration_e: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.exploration_e <= 1.0:
            raise ValueError("exploration_e must lie in [0, 1]")


def selection_probabilities(num_labels: int, best: int, e):
    """Epsilon-greedy probabilities as a plain list.

    Works with any numeric type, so passing a ``Fraction`` for ``e`` gives
    exact rational probabilities.
    """
    if num_labels < 1 or not 0 <= best < num_labels:
        raise ValueError("best must index one of num_labels labels")
    share = e / num_labels
    probs = [share] * num_labels
    probs[best] = 1 - e + share
    return probs


def selection_distribution(gains: Sequence[float], e: float) -> np.ndarray:
    """Epsilon-greedy probabilities: the best label (lowest id on ties) gets
    ``1 - e + e/|K|``, every other label ``e/|K|``."""
    gains = np.asarray(gains, dtype=float)
    return np.array(selection_probabilities(gains.size, int(np.argmax(gains)), e), dtype=float)


def epsilon_greedy_select(gains: Sequence[float], policy: SelectionPolicy, rng: np.random.Generator) -> int:
    gains = np.asarray(gains, dtype=float)
    if gains.size == 0:
        raise ValueError("no labels to choose from")
    if rng.random() < policy.exploration_e:
        return int(rng.integers(gains.size))
    return int(np.argmax(gains))


class ValueAgent:
    """Q-learning attacker over a window of its own past choices.

    The state is the last ``window`` rounds, each encoded as a one-hot of the
    attacked label followed by the scaled reward received. Two hidden layers
    of rectifier units map the state to one value per label.

    Args:
        num_configs: number of labels to choose from.
        reward_scale: multiplier applied to raw rewards before they enter the
            state or the TD target; keeps values of order one.
    """

    def __init__(
        self,
        num_configs: int,
        rng: np.random.Generator,
        *,
        window: int = 8,
        hidden: int = 10,
        memory_size: int = 2000,
        batch_size: int = 32,
        discount: float = 0.9,
        learning_rate: float = 0.1,
        greedy_prob: float = 0.9,
        reward_scale: float = 1.0,
        init_range: float = 0.1,
    ):
        self.num_configs = num_configs
        self.window = window
        self.memory_size = memory_size
        self.batch_size = batch_size
        self.discount = discount
        self.learning_rate = learning_rate
        self.greedy_prob = greedy_prob
        self.reward_scale = reward_scale
        self.input_dim = window * (num_configs + 1)
        sizes = [self.input_dim, hidden, hidden, num_configs]
        self.weights = [rng.uniform(-init_range, init_range, (a, b)) for a, b in zip(sizes, sizes[1:])]
        self.biases = [rng.uniform(-init_range, init_range, b) for b in sizes[1:]]
        self.history: deque[tuple[int, float]] = deque(maxlen=window)
        self._states = np.zeros((memory_size, self.input_dim))
        self._next_states = np.zeros((memory_size, self.input_dim))
        self._actions = np.zeros(memory_size, dtype=np.int64)
        self._rewards = np.zeros(memory_size)
        self._replay_size = 0
        self._replay_pos = 0

    @property
    def replay_size(self) -> int:
        return self._replay_size

    def state(self) -> np.ndarray:
        K = self.num_configs
        x = np.zeros((self.window, K + 1))
        # most recent round last; earlier slots stay zero until filled
        offset = self.window - len(self.history)
        for i, (action, reward) in enumerate(self.history):
            x[offset + i, action] = 1.0
            x[offset + i, K] = reward
        return x.ravel()

    def q_values(self, states: np.ndarray) -> np.ndarray:
        return self._forward(np.atleast_2d(states))[-1]

    def _forward(self, x: np.ndarray) -> list[np.ndarray]:
        acts = [x]
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = acts[-1] @ W + b
            acts.append(np.maximum(z, 0.0) if i < len(self.weights) - 1 else z)
        return acts

    def act(self, rng: np.random.Generator) -> int:
        if rng.random() < self.greedy_prob:
            return int(np.argmax(self.q_values(self.state())[0]))
        return int(rng.integers(self.num_configs))

    def greedy_action(self) -> int:
        return int(np.argmax(self.q_values(self.state())[0]))

    def observe(self, action: int, reward: float) -> np.ndarray:
        """Append the outcome to the history window and return the new state."""
        self.history.append((action, reward * self.reward_scale))
        return self.state()

    def learn(self, transition: tuple[np.ndarray, int, float, np.ndarray], rng: np.random.Generator) -> None:
        state, action, reward, next_state = transition
        pos = self._replay_pos
        self._states[pos] = state
        self._next_states[pos] = next_state
        self._actions[pos] = action
        self._rewards[pos] = reward * self.reward_scale
        self._replay_pos = (pos + 1) % self.memory_size
        self._replay_size = min(self._replay_size + 1, self.memory_size)
        if self._replay_size < self.batch_size:
            return
        idx = rng.integers(self._replay_size, size=self.batch_size)
        states = self._states[idx]
        actions = self._actions[idx]
        rewards = self._rewards[idx]
        next_states = self._next_states[idx]

        targets = rewards + self.discount * self.q_values(next_states).max(axis=1)
        acts = self._forward(states)
        rows = np.arange(self.batch_size)
        td = np.clip(acts[-1][rows, actions] - targets, -1.0, 1.0)
        grad = np.zeros_like(acts[-1])
        grad[rows, actions] = td / self.batch_size
        for layer in range(len(self.weights) - 1, -1, -1):
            gW = acts[layer].T @ grad
            gb = grad.sum(axis=0)
            if layer > 0:
                grad = (grad @ self.weights[layer].T) * (acts[layer] > 0)
            self.weights[layer] -= self.learning_rate * gW
            self.biases[layer] -= self.learning_rate * gb


def value_agent_step(agent: ValueAgent, observed: Mapping | Sequence | None, rng: np.random.Generator) -> int:
    # the learned policy depends on the attacker's own history only, not the scan
    return agent.act(rng)


def value_agent_learn(
    agent: ValueAgent, transition: tuple[np.ndarray, int, float, np.ndarray], rng: np.random.Generator
) -> ValueAgent:
    agent.learn(transition, rng)
    return agent
