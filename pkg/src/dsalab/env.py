"""Correlated multichannel environment.

The channel system is a Markov chain over joint condition assignments: a
cyclic list of pattern states, each assigning bad/good/excellent to every
channel. Each slot the chain advances to the next state with probability
``switch_prob`` and stays put otherwise. Users pick k channels per slot and
observe feedback only on the channels they accessed; colliding users on a
usable channel share a discounted reward.

Everything here is purely functional: ``step`` consumes an ``EnvState`` and
returns the outcome plus the successor state. All randomness comes from the
caller's ``numpy.random.Generator``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from math import comb
from typing import Callable, Optional, Sequence

import numpy as np


class ChannelCondition(IntEnum):
    BAD = 0
    GOOD = 1
    EXCELLENT = 2


# Reward carried by a channel's condition when accessed alone (before any
# collision discount or priority doubling).
CONDITION_REWARD = {
    ChannelCondition.BAD: -1.0,
    ChannelCondition.GOOD: 1.0,
    ChannelCondition.EXCELLENT: 2.0,
}

_CONDITION_CODES = {"B": ChannelCondition.BAD, "G": ChannelCondition.GOOD,
                    "E": ChannelCondition.EXCELLENT}
_CODE_OF_CONDITION = {v: k for k, v in _CONDITION_CODES.items()}


class RewardMode(IntEnum):
    """How joint actions resolve into per-user rewards."""

    SINGLE_USER = 0
    MULTI_SHARE = 1              # colliding users share the discounted reward
    MULTI_PRIMARY_SHARE = 2      # as above, primary's reward doubled
    MULTI_PRIMARY_EXCLUSIVE = 3  # primary occupies contested channels alone


class OutcomeLabel(IntEnum):
    EXCELLENT_ALONE = 0
    COLLISION_EXCELLENT = 1
    GOOD_ALONE = 2
    COLLISION_GOOD = 3
    COLLISION_WITH_PRIMARY = 4
    COLLISION_WITH_SECONDARY = 5
    BAD = 6


@dataclass(frozen=True)
class PatternSpec:
    """A cyclic channel-state switching pattern.

    ``states`` is an (S, N) int8 array of ``ChannelCondition`` values; the
    chain cycles through its rows in order, advancing with probability
    ``switch_prob`` per slot. Every row must carry the same number of good
    and excellent channels so the achievable reward is stationary.
    """

    num_channels: int
    states: np.ndarray
    switch_prob: float
    label: str = ""

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.int8)
        object.__setattr__(self, "states", states)
        if self.num_channels <= 0:
            raise ValueError("num_channels must be positive")
        if states.ndim != 2 or states.shape[0] == 0:
            raise ValueError("states must be a non-empty (S, N) array")
        if states.shape[1] != self.num_channels:
            raise ValueError(
                f"state width {states.shape[1]} != num_channels {self.num_channels}")
        if not 0.0 <= self.switch_prob <= 1.0:
            raise ValueError("switch_prob must lie in [0, 1]")
        good_counts = (states == ChannelCondition.GOOD).sum(axis=1)
        exc_counts = (states == ChannelCondition.EXCELLENT).sum(axis=1)
        if len(set(good_counts.tolist())) != 1 or len(set(exc_counts.tolist())) != 1:
            raise ValueError("all pattern states must share good/excellent counts")

    @property
    def num_states(self) -> int:
        return self.states.shape[0]

    def usable_channels(self, state_index: int) -> np.ndarray:
        """Indices of non-bad channels in the given pattern state."""
        return np.flatnonzero(self.states[state_index] != ChannelCondition.BAD)


@dataclass(frozen=True)
class EnvState:
    pattern: PatternSpec
    state_index: int = 0
    slot: int = 0

    def __post_init__(self):
        if not 0 <= self.state_index < self.pattern.num_states:
            raise ValueError("state_index out of range")

    @property
    def conditions(self) -> np.ndarray:
        return self.pattern.states[self.state_index]


@dataclass(frozen=True, order=True)
class ChannelAction:
    """A set of k distinct channel indices accessed in one slot."""

    channels: tuple

    def __post_init__(self):
        chans = tuple(int(c) for c in self.channels)
        object.__setattr__(self, "channels", chans)
        if len(chans) == 0:
            raise ValueError("an action must select at least one channel")
        if any(c < 0 for c in chans):
            raise ValueError("channel indices must be non-negative")
        if list(chans) != sorted(set(chans)):
            raise ValueError("channels must be strictly increasing and distinct")

    @property
    def k(self) -> int:
        return len(self.channels)


def action_index(action: ChannelAction, num_channels: int) -> int:
    """Lexicographic rank of a k-subset among all C(N, k) subsets."""
    k = action.k
    if not 1 <= k < num_channels or action.channels[-1] >= num_channels:
        raise ValueError("action does not fit num_channels")
    rank = 0
    prev = -1
    for pos, c in enumerate(action.channels):
        for v in range(prev + 1, c):
            rank += comb(num_channels - 1 - v, k - pos - 1)
        prev = c
    return rank


def action_from_index(index: int, num_channels: int, k: int) -> ChannelAction:
    """Inverse of :func:`action_index`."""
    if not 1 <= k < num_channels:
        raise ValueError("need 1 <= k < num_channels")
    total = comb(num_channels, k)
    if not 0 <= index < total:
        raise ValueError(f"index {index} outside [0, {total})")
    channels = []
    v = 0
    remaining = index
    for pos in range(k):
        while True:
            block = comb(num_channels - 1 - v, k - pos - 1)
            if remaining < block:
                channels.append(v)
                v += 1
                break
            remaining -= block
            v += 1
    return ChannelAction(tuple(channels))


def num_actions(num_channels: int, k: int) -> int:
    return comb(num_channels, k)


# ---------------------------------------------------------------------------
# Pattern constructors


def make_round_robin(num_channels: int, goods: int, switch_prob: float) -> PatternSpec:
    """Cyclic pattern whose good set rotates in round-robin order.

    When ``goods`` divides N the good channels form contiguous disjoint
    blocks and the chain has N/goods states (one per block). Otherwise the
    good set is a width-``goods`` window sliding one channel per state, for
    N states; either way every state has exactly ``goods`` good channels.
    """
    if num_channels <= 0:
        raise ValueError("num_channels must be positive")
    if not 1 <= goods < num_channels:
        raise ValueError("need 1 <= goods < num_channels")
    states = _rotating_states(num_channels, goods)
    return PatternSpec(num_channels, states, switch_prob,
                       label=f"round-robin N={num_channels} goods={goods}")


def _rotating_states(num_channels: int, goods: int) -> np.ndarray:
    if num_channels % goods == 0:
        num_states = num_channels // goods
        states = np.zeros((num_states, num_channels), dtype=np.int8)
        for s in range(num_states):
            states[s, s * goods:(s + 1) * goods] = ChannelCondition.GOOD
    else:
        states = np.zeros((num_channels, num_channels), dtype=np.int8)
        for s in range(num_channels):
            idx = (s + np.arange(goods)) % num_channels
            states[s, idx] = ChannelCondition.GOOD
    return states


def make_permutation(num_channels: int, goods: int, switch_prob: float,
                     permutation: Sequence[int]) -> PatternSpec:
    """Round-robin pattern with channel indices relabeled by a bijection."""
    perm = np.asarray(permutation, dtype=np.int64)
    if perm.shape != (num_channels,) or sorted(perm.tolist()) != list(range(num_channels)):
        raise ValueError("permutation must be a bijection on [0, num_channels)")
    base = make_round_robin(num_channels, goods, switch_prob)
    states = np.zeros_like(base.states)
    states[:, perm] = base.states
    return PatternSpec(num_channels, states, switch_prob,
                       label=f"permutation N={num_channels} goods={goods}")


def reverse_pattern(pattern: PatternSpec) -> PatternSpec:
    """The same states visited in the opposite cyclic order.

    Useful as an abrupt environment change: channel groupings survive but
    every learned successor relation inverts.
    """
    return PatternSpec(pattern.num_channels, pattern.states[::-1].copy(),
                       pattern.switch_prob,
                       label=(pattern.label + " reversed").strip())


def make_three_state(num_channels: int, excellent: int, good: int,
                     switch_prob: float) -> PatternSpec:
    """Rotating pattern with fixed counts of excellent and good channels.

    State s places the excellent channels at positions s..s+excellent-1 and
    the good channels immediately after, both modulo N, so the two sets are
    always disjoint and rotate together one channel per state.
    """
    if excellent < 0 or good < 0 or excellent + good < 1:
        raise ValueError("need at least one usable channel per state")
    if excellent + good >= num_channels:
        raise ValueError("excellent + good must be < num_channels")
    if excellent == 0:
        spec = make_round_robin(num_channels, good, switch_prob)
        return PatternSpec(num_channels, spec.states, switch_prob,
                           label=f"three-state N={num_channels} excellent=0 good={good}")
    states = np.zeros((num_channels, num_channels), dtype=np.int8)
    for s in range(num_channels):
        exc_idx = (s + np.arange(excellent)) % num_channels
        good_idx = (s + excellent + np.arange(good)) % num_channels
        states[s, exc_idx] = ChannelCondition.EXCELLENT
        states[s, good_idx] = ChannelCondition.GOOD
    return PatternSpec(num_channels, states, switch_prob,
                       label=f"three-state N={num_channels} excellent={excellent} good={good}")


# ---------------------------------------------------------------------------
# Dynamics


def transition(state: EnvState, rng: np.random.Generator) -> EnvState:
    """Advance one slot: move to the next pattern state with probability p."""
    index = state.state_index
    if rng.random() < state.pattern.switch_prob:
        index = (index + 1) % state.pattern.num_states
    return EnvState(state.pattern, index, state.slot + 1)


@dataclass(frozen=True)
class StepOutcome:
    """Realized rewards, observations, occupancy and labels for one slot."""

    per_user_reward: np.ndarray          # (U,) float
    per_user_observation: np.ndarray     # (U, N) float, 0 at unselected channels
    occupancy: np.ndarray                # (N,) int, users per channel
    labels: tuple                        # (U,) OutcomeLabel

    def observation(self, user: int) -> np.ndarray:
        return observe(self, user)


def observe(outcome: StepOutcome, user: int) -> np.ndarray:
    """Per-channel observation row for one user (zero at unselected channels)."""
    if not 0 <= user < len(outcome.per_user_reward):
        raise ValueError(f"unknown user id {user}")
    return outcome.per_user_observation[user]


def default_collision_discount(occupants: int) -> float:
    return 1.0 / occupants


# precedence when a k>1 action spans several outcomes: report the most
# significant event (collisions first, then successes, then bad)
_LABEL_PRECEDENCE = (
    OutcomeLabel.COLLISION_WITH_PRIMARY,
    OutcomeLabel.COLLISION_EXCELLENT,
    OutcomeLabel.COLLISION_GOOD,
    OutcomeLabel.COLLISION_WITH_SECONDARY,
    OutcomeLabel.EXCELLENT_ALONE,
    OutcomeLabel.GOOD_ALONE,
    OutcomeLabel.BAD,
)


def step(state: EnvState, actions: Sequence[ChannelAction], rng: np.random.Generator,
         mode: RewardMode = RewardMode.SINGLE_USER,
         primary_index: Optional[int] = None,
         collision_discount: Callable[[int], float] = default_collision_discount,
         ) -> "tuple[StepOutcome, EnvState]":
    """Resolve one slot of joint channel access.

    Per channel, a lone user on a usable channel earns its condition reward
    (+1 good, +2 excellent); occupancy m >= 2 scales it by
    ``collision_discount(m)`` except in exclusive-priority mode, where the
    primary keeps the undiscounted reward and secondaries that hit the
    primary's channel get the bad-channel reward. Bad channels always pay -1.
    In priority modes the primary user's reward is doubled, sign included.
    The chain then advances via :func:`transition`.
    """
    num_users = len(actions)
    if num_users == 0:
        raise ValueError("need at least one user action")
    n = state.pattern.num_channels
    for a in actions:
        if a.channels[-1] >= n:
            raise ValueError("action selects a channel outside the pattern")
    if mode == RewardMode.SINGLE_USER and num_users != 1:
        raise ValueError("single-user mode requires exactly one action")
    priority = mode in (RewardMode.MULTI_PRIMARY_SHARE, RewardMode.MULTI_PRIMARY_EXCLUSIVE)
    if priority:
        if primary_index is None or not 0 <= primary_index < num_users:
            raise ValueError("priority modes require a valid primary_index")
    elif primary_index is not None:
        raise ValueError("primary_index only applies to priority modes")

    conditions = state.conditions
    occupancy = np.zeros(n, dtype=np.int64)
    for a in actions:
        occupancy[list(a.channels)] += 1
    primary_channels = set(actions[primary_index].channels) if priority else set()

    observations = np.zeros((num_users, n), dtype=np.float64)
    rewards = np.zeros(num_users, dtype=np.float64)
    labels = []
    for j, a in enumerate(actions):
        is_primary = priority and j == primary_index
        chan_labels = []
        for i in a.channels:
            cond = ChannelCondition(conditions[i])
            m = occupancy[i]
            if cond == ChannelCondition.BAD:
                value = -1.0
                chan_labels.append(OutcomeLabel.BAD)
            elif m == 1:
                value = CONDITION_REWARD[cond]
                chan_labels.append(OutcomeLabel.EXCELLENT_ALONE
                                   if cond == ChannelCondition.EXCELLENT
                                   else OutcomeLabel.GOOD_ALONE)
            elif mode == RewardMode.MULTI_PRIMARY_EXCLUSIVE:
                if is_primary:
                    # primary occupies the contested channel alone
                    value = CONDITION_REWARD[cond]
                    chan_labels.append(OutcomeLabel.EXCELLENT_ALONE
                                       if cond == ChannelCondition.EXCELLENT
                                       else OutcomeLabel.GOOD_ALONE)
                elif i in primary_channels:
                    value = -1.0
                    chan_labels.append(OutcomeLabel.COLLISION_WITH_PRIMARY)
                else:
                    value = CONDITION_REWARD[cond] * collision_discount(m)
                    chan_labels.append(OutcomeLabel.COLLISION_WITH_SECONDARY)
            else:
                value = CONDITION_REWARD[cond] * collision_discount(m)
                chan_labels.append(OutcomeLabel.COLLISION_EXCELLENT
                                   if cond == ChannelCondition.EXCELLENT
                                   else OutcomeLabel.COLLISION_GOOD)
            if is_primary:
                value *= 2.0
            observations[j, i] = value
        rewards[j] = observations[j, list(a.channels)].sum()
        labels.append(min(chan_labels, key=_LABEL_PRECEDENCE.index))

    outcome = StepOutcome(rewards, observations, occupancy, tuple(labels))
    return outcome, transition(state, rng)


# ---------------------------------------------------------------------------
# Serialization (replayable pattern documents)


def pattern_to_dict(spec: PatternSpec) -> dict:
    return {
        "num_channels": spec.num_channels,
        "switch_prob": spec.switch_prob,
        "label": spec.label,
        "states": [[_CODE_OF_CONDITION[ChannelCondition(c)] for c in row]
                   for row in spec.states],
    }


def pattern_from_dict(doc: dict) -> PatternSpec:
    try:
        rows = doc["states"]
        states = np.array([[_CONDITION_CODES[code] for code in row] for row in rows],
                          dtype=np.int8)
        return PatternSpec(int(doc["num_channels"]), states,
                           float(doc["switch_prob"]), str(doc.get("label", "")))
    except KeyError as exc:
        raise ValueError(f"pattern document missing field {exc}") from exc


def save_pattern(spec: PatternSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(pattern_to_dict(spec), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_pattern(path) -> PatternSpec:
    with open(path) as fh:
        return pattern_from_dict(json.load(fh))
