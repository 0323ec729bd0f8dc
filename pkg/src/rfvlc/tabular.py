"""Tabular Q-learning over the coarse per-user rate-status code.

Each user's situation is coded 1 (below target), 2 (above the tolerance
band) or 3 (inside the band); the joint code over all users indexes the
table rows. Actions are vectors of discrete per-user power levels subject
to the AP's sum-power budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Slack for floating-point sums when testing the power budget.
SUM_POWER_TOL = 1e-12

BELOW_TARGET = 1
ABOVE_BAND = 2
IN_BAND = 3


def discretize_state(
    actual: Sequence[float], targets: Sequence[float], bands: Sequence[float]
) -> tuple[int, ...]:
    """Code each user's rate against its target band (all inputs same units)."""
    if not len(actual) == len(targets) == len(bands):
        raise ValueError("rate/target/band vectors must have equal length")
    codes = []
    for r, t, b in zip(actual, targets, bands):
        if r < t:
            codes.append(BELOW_TARGET)
        elif r > t + b:
            codes.append(ABOVE_BAND)
        else:
            codes.append(IN_BAND)
    return tuple(codes)


def joint_state_index(codes: Sequence[int]) -> int:
    """Pack per-user codes into a base-3 row index, user 0 least significant."""
    index = 0
    for u, code in enumerate(codes):
        if code not in (BELOW_TARGET, ABOVE_BAND, IN_BAND):
            raise ValueError(f"invalid state code {code}")
        index += (code - 1) * 3**u
    return index


def num_joint_states(n_users: int) -> int:
    return 3**n_users


@dataclass(frozen=True)
class ActionSpace:
    """All feasible per-user power vectors of one AP, in lexicographic order."""

    actions: np.ndarray  # [n_actions, n_users], watts
    levels: tuple[float, ...]
    max_sum: float

    @property
    def n_actions(self) -> int:
        return self.actions.shape[0]

    @property
    def n_users(self) -> int:
        return self.actions.shape[1]


def enumerate_actions(
    levels: Sequence[float], n_users: int, max_sum: float
) -> ActionSpace:
    """Enumerate every power vector over `levels` whose sum fits the budget.

    The result is deduplicated and lexicographically ordered so action
    indices are stable across runs. Zero users is a valid boundary (an AP
    serving nobody): the space holds the single empty allocation.
    """
    if n_users < 0:
        raise ValueError("n_users must be >= 0")
    if not levels:
        raise ValueError("power level set must not be empty")
    uniq = sorted(set(float(v) for v in levels))
    if uniq[0] < 0.0:
        raise ValueError("power levels must be >= 0")
    if n_users == 0:
        return ActionSpace(
            actions=np.empty((1, 0), dtype=float), levels=tuple(uniq), max_sum=max_sum
        )

    found: list[tuple[float, ...]] = []

    def extend(prefix: list[float], partial: float) -> None:
        if len(prefix) == n_users:
            found.append(tuple(prefix))
            return
        remaining = n_users - len(prefix) - 1
        for v in uniq:
            s = partial + v + remaining * uniq[0]
            if s > max_sum + SUM_POWER_TOL:
                break  # levels ascend, so every later v overshoots too
            prefix.append(v)
            extend(prefix, partial + v)
            prefix.pop()

    extend([], 0.0)
    if not found:
        raise ValueError(
            f"no feasible action: {n_users} users, levels {uniq}, budget {max_sum} W"
        )
    return ActionSpace(
        actions=np.array(found, dtype=float), levels=tuple(uniq), max_sum=max_sum
    )


def epsilon(t: int) -> float:
    """Exploration probability at iteration t >= 1: 0.99^(t-1), floored at 0.1."""
    if t < 1:
        raise ValueError("iterations are counted from 1")
    return max(0.99 ** (t - 1), 0.1)


@dataclass
class QTable:
    """Dense state x action table of expected-return estimates."""

    values: np.ndarray
    learning_rate: float
    discount: float

    @classmethod
    def zeros(cls, n_states: int, n_actions: int, learning_rate: float, discount: float) -> "QTable":
        return cls(np.zeros((n_states, n_actions)), learning_rate, discount)


def select_action(q: QTable, state_index: int, eps: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy over one table row; greedy ties go to the lowest index."""
    if rng.random() < eps:
        return int(rng.integers(q.values.shape[1]))
    return int(np.argmax(q.values[state_index]))


def q_update(
    q: QTable, state_index: int, action_index: int, reward: float, next_state_index: int
) -> None:
    """One temporal-difference backup; touches only the updated cell."""
    alpha = q.learning_rate
    target = reward + q.discount * float(np.max(q.values[next_state_index]))
    q.values[state_index, action_index] = (
        (1.0 - alpha) * q.values[state_index, action_index] + alpha * target
    )


class QlAgent:
    """One AP's independent learner; sees only the shared state and reward."""

    def __init__(
        self,
        n_states: int,
        action_space: ActionSpace,
        learning_rate: float,
        discount: float,
        rng: np.random.Generator,
    ):
        self.action_space = action_space
        self.table = QTable.zeros(n_states, action_space.n_actions, learning_rate, discount)
        self.rng = rng

    def act(self, state_index: int, t: int) -> int:
        return select_action(self.table, state_index, epsilon(t), self.rng)

    def update(
        self, state_index: int, action_index: int, reward: float, next_state_index: int
    ) -> None:
        q_update(self.table, state_index, action_index, reward, next_state_index)

    def dump_table(self, path: str) -> None:
        """Write the table as CSV rows (state_index, action_index, value)."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("state_index,action_index,value\n")
            for s in range(self.table.values.shape[0]):
                for a in range(self.table.values.shape[1]):
                    fh.write(f"{s},{a},{float(self.table.values[s, a])!r}\n")
