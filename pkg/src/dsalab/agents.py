"""Channel access policies.

Five decision makers share one tiny interface (select, then learn):

* ``AcAgent`` — actor-critic policy gradient over a sliding observation
  stack. The critic regresses the TD target, the actor ascends the
  TD-weighted log-probability of the taken action.
* ``DqnAgent`` — epsilon-greedy Q-learning with uniform experience replay,
  the comparison baseline.
* ``RandomAgent`` — uniform channel choice (slotted-ALOHA style floor).
* ``WhittleAgent`` — belief tracking over per-channel two-state chains
  calibrated from a probing log, selecting the top-k beliefs.
* ``GenieAgent`` — knows the pattern and plays the myopic optimal rule.

Agents never see the true pattern state (the genie excepted); they act on
their own observation history only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from dsalab.env import (
    CONDITION_REWARD,
    ChannelAction,
    ChannelCondition,
    PatternSpec,
    action_from_index,
    action_index,
    num_actions,
)
from dsalab.numerics import (
    ForwardTrace,
    Mlp,
    actor_update,
    backprop,
    apply_gradients,
    critic_update,
    forward,
    init_mlp,
)


class ObservationStack:
    """Sliding window of the most recent omega observation rows.

    Stored as an (omega, N) matrix with the newest row first, initialized to
    all zeros. ``flatten`` yields the network input: row-major, so channels
    within a slot stay contiguous and the newest slot leads.
    """

    def __init__(self, num_channels: int, omega: int):
        if num_channels <= 0 or omega <= 0:
            raise ValueError("num_channels and omega must be positive")
        self.num_channels = num_channels
        self.omega = omega
        self.window = np.zeros((omega, num_channels), dtype=np.float64)

    def push(self, observation: np.ndarray) -> None:
        obs = np.asarray(observation, dtype=np.float64)
        if obs.shape != (self.num_channels,):
            raise ValueError(f"observation must have shape ({self.num_channels},)")
        # allocate a fresh window so flattened copies handed to the nets
        # earlier in the slot are never silently rewritten
        self.window = np.vstack([obs[None, :], self.window[:-1]])

    def flatten(self) -> np.ndarray:
        return self.window.reshape(-1).copy()

    def copy(self) -> "ObservationStack":
        dup = ObservationStack(self.num_channels, self.omega)
        dup.window = self.window.copy()
        return dup


# ---------------------------------------------------------------------------
# Actor-critic


@dataclass
class AcConfig:
    omega: int = 16
    hidden: Tuple[int, ...] = (200,)
    gamma: float = 0.9
    lr_actor: float = 0.0001
    lr_critic: float = 0.0005
    decay_rate: float = 0.95
    decay_period: int = 50_000
    mode: str = "sample"          # "sample" or "argmax"

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not self.lr_actor < self.lr_critic:
            raise ValueError("lr_actor must be smaller than lr_critic")
        if self.mode not in ("sample", "argmax"):
            raise ValueError("mode must be 'sample' or 'argmax'")


class AcAgent:
    """Actor-critic agent over the flattened observation stack.

    Per slot: ``select`` runs the actor and draws (or argmaxes) an action;
    after the environment resolves, ``learn`` forms the TD error
    delta = R + gamma*V(next) - V(current), steps the critic toward the
    target and the actor along delta * grad log pi(action). Learning rates
    decay multiplicatively every ``decay_period`` slots.
    """

    kind = "ac"

    def __init__(self, num_channels: int, k: int, config: AcConfig, seed: int):
        self.num_channels = num_channels
        self.k = k
        self.config = config
        self.num_actions = num_actions(num_channels, k)
        input_dim = num_channels * config.omega
        self.actor = init_mlp((input_dim,) + config.hidden + (self.num_actions,),
                              ["relu"] * len(config.hidden) + ["softmax"], seed)
        self.critic = init_mlp((input_dim,) + config.hidden + (1,),
                               ["relu"] * len(config.hidden) + ["identity"], seed + 1)
        self.stack = ObservationStack(num_channels, config.omega)
        self.lr_actor = config.lr_actor
        self.lr_critic = config.lr_critic
        self.slot = 0
        self._decay_anchor = 0
        self._pending: Optional[tuple] = None

    def select(self, rng: np.random.Generator) -> Tuple[ChannelAction, int]:
        x = self.stack.flatten()
        probs, actor_trace = forward(self.actor, x)
        if self.config.mode == "argmax":
            index = int(np.argmax(probs))
        else:
            # inverse-CDF draw; probs sum to 1 so the clip only guards the
            # open edge case u ~ 1 against accumulated rounding
            index = min(int(np.searchsorted(np.cumsum(probs), rng.random())),
                        self.num_actions - 1)
        _, critic_trace = forward(self.critic, x)
        self._pending = (index, actor_trace, critic_trace)
        return action_from_index(index, self.num_channels, self.k), index

    def learn(self, action_index_taken: int, reward: float,
              next_observation: np.ndarray,
              rng: Optional[np.random.Generator] = None) -> float:
        """Consume the slot outcome; returns the TD error."""
        if self._pending is None:
            raise RuntimeError("learn called before select in this slot")
        index, actor_trace, critic_trace = self._pending
        if index != action_index_taken:
            raise ValueError("learn got a different action than select returned")
        self._pending = None

        self.stack.push(next_observation)
        next_value, _ = forward(self.critic, self.stack.flatten())
        value = float(critic_trace.output[0])
        target = reward + self.config.gamma * float(next_value[0])
        delta = target - value

        critic_update(self.critic, critic_trace, target, self.lr_critic)
        actor_update(self.actor, actor_trace, index, delta, self.lr_actor)

        self.slot += 1
        if (self.slot - self._decay_anchor) % self.config.decay_period == 0:
            self.lr_actor *= self.config.decay_rate
            self.lr_critic *= self.config.decay_rate
        return delta

    def reset_learning_rates(self) -> None:
        """Restore the initial learning rates and restart the decay clock."""
        self.lr_actor = self.config.lr_actor
        self.lr_critic = self.config.lr_critic
        self._decay_anchor = self.slot


# ---------------------------------------------------------------------------
# DQN baseline


@dataclass
class DqnConfig:
    omega: int = 16
    hidden: Tuple[int, ...] = (200, 200)
    gamma: float = 0.9
    lr: float = 0.0005
    replay_capacity: int = 100_000
    batch: int = 32
    epsilon_start: float = 1.0
    epsilon_end: float = 0.02
    epsilon_slots: int = 40_000   # anneal horizon; pick ~20% of the run

    def __post_init__(self):
        if self.replay_capacity < self.batch:
            raise ValueError("replay capacity must hold at least one batch")
        if not 0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0:
            raise ValueError("epsilon schedule must satisfy 0 <= end <= start <= 1")


class ReplayBuffer:
    """Fixed-capacity ring of (state, action, reward, next state) records."""

    def __init__(self, capacity: int, state_dim: int):
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim), dtype=np.float32)
        self.next_states = np.zeros((capacity, state_dim), dtype=np.float32)
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity, dtype=np.float64)
        self.size = 0
        self.cursor = 0

    def push(self, state, action, reward, next_state) -> None:
        i = self.cursor
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch: int, rng: np.random.Generator):
        idx = rng.choice(self.size, size=batch, replace=False)
        return (self.states[idx].astype(np.float64), self.actions[idx],
                self.rewards[idx], self.next_states[idx].astype(np.float64))


class DqnAgent:
    """Epsilon-greedy Q-learner over the same observation stack.

    One online network (no separate target copy); a uniformly sampled
    minibatch regression toward r + gamma * max_a' Q(s', a') per slot once
    the replay buffer holds a full batch. Epsilon anneals linearly from
    epsilon_start to epsilon_end over epsilon_slots.
    """

    kind = "dqn"

    def __init__(self, num_channels: int, k: int, config: DqnConfig, seed: int):
        self.num_channels = num_channels
        self.k = k
        self.config = config
        self.num_actions = num_actions(num_channels, k)
        input_dim = num_channels * config.omega
        self.qnet = init_mlp((input_dim,) + config.hidden + (self.num_actions,),
                             ["relu"] * len(config.hidden) + ["identity"], seed)
        self.stack = ObservationStack(num_channels, config.omega)
        self.replay = ReplayBuffer(config.replay_capacity, input_dim)
        self.slot = 0
        self._pending: Optional[tuple] = None

    @property
    def epsilon(self) -> float:
        cfg = self.config
        if cfg.epsilon_slots <= 0:
            return cfg.epsilon_end
        frac = min(1.0, self.slot / cfg.epsilon_slots)
        return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)

    def select(self, rng: np.random.Generator) -> Tuple[ChannelAction, int]:
        x = self.stack.flatten()
        if rng.random() < self.epsilon:
            index = int(rng.integers(self.num_actions))
        else:
            q, _ = forward(self.qnet, x)
            index = int(np.argmax(q))   # argmax takes the lowest index on ties
        self._pending = (index, x)
        return action_from_index(index, self.num_channels, self.k), index

    def learn(self, action_index_taken: int, reward: float,
              next_observation: np.ndarray, rng: np.random.Generator
              ) -> Optional[float]:
        """Store the transition and, buffer permitting, take one SGD step.

        Returns the minibatch loss, or None while the buffer is still short.
        """
        if rng is None:
            raise ValueError("dqn learning needs the slot rng for replay sampling")
        if self._pending is None:
            raise RuntimeError("learn called before select in this slot")
        index, x = self._pending
        if index != action_index_taken:
            raise ValueError("learn got a different action than select returned")
        self._pending = None

        self.stack.push(next_observation)
        self.replay.push(x, index, reward, self.stack.flatten())
        self.slot += 1
        if self.replay.size < self.config.batch:
            return None

        states, actions, rewards, next_states = self.replay.sample(self.config.batch, rng)
        next_q, _ = forward(self.qnet, next_states)
        targets = rewards + self.config.gamma * next_q.max(axis=1)
        q, trace = forward(self.qnet, states)
        taken = q[np.arange(len(actions)), actions]
        residual = taken - targets
        loss = float(np.mean(residual ** 2))
        # mean squared Bellman error: gradient lands only on the taken actions
        head_grad = np.zeros_like(q)
        head_grad[np.arange(len(actions)), actions] = 2.0 * residual / len(actions)
        apply_gradients(self.qnet, backprop(self.qnet, trace, head_grad), self.config.lr)
        return loss


# ---------------------------------------------------------------------------
# Random access


class RandomAgent:
    """Uniform choice over all C(N, k) actions; learns nothing."""

    kind = "random"

    def __init__(self, num_channels: int, k: int):
        self.num_channels = num_channels
        self.k = k
        self.num_actions = num_actions(num_channels, k)

    def select(self, rng: np.random.Generator) -> Tuple[ChannelAction, int]:
        return random_select(self.num_channels, self.k, rng)

    def learn(self, action_index_taken: int, reward: float,
              next_observation: np.ndarray,
              rng: Optional[np.random.Generator] = None) -> None:
        return None


def random_select(num_channels: int, k: int,
                  rng: np.random.Generator) -> Tuple[ChannelAction, int]:
    """Uniform draw over all C(N, k) channel subsets."""
    if not 1 <= k < num_channels:
        raise ValueError("need 1 <= k < num_channels")
    index = int(rng.integers(num_actions(num_channels, k)))
    return action_from_index(index, num_channels, k), index


# ---------------------------------------------------------------------------
# Belief-based heuristic (two-state restless arms)


@dataclass
class BeliefState:
    """Per-channel chain estimates plus the current belief of being usable.

    ``transitions[i]`` is the estimated 2x2 matrix of channel i, rows = from
    state (0 bad, 1 good/usable), columns = to state, rows summing to 1.
    ``beliefs[i]`` is the probability channel i is usable now.
    """

    transitions: np.ndarray    # (N, 2, 2)
    beliefs: np.ndarray        # (N,)

    def __post_init__(self):
        if not np.allclose(self.transitions.sum(axis=2), 1.0, atol=1e-9):
            raise ValueError("transition rows must sum to 1")
        if np.any(self.beliefs < 0) or np.any(self.beliefs > 1):
            raise ValueError("beliefs must lie in [0, 1]")


def whittle_estimate(probe_log: np.ndarray) -> BeliefState:
    """Calibrate per-channel chains from a full-visibility probe log.

    ``probe_log`` is a (T, N) 0/1 matrix of usable-channel indicators over a
    dedicated probing phase. Transition counts get add-one smoothing, so a
    single-row log still produces valid rows. Beliefs start at each
    channel's empirical usable frequency.
    """
    log = np.asarray(probe_log)
    if log.ndim != 2 or log.shape[0] == 0:
        raise ValueError("probe log must be a non-empty (T, N) matrix")
    t, n = log.shape
    transitions = np.ones((n, 2, 2))        # add-one smoothing baked in
    if t > 1:
        src, dst = log[:-1], log[1:]
        for a in (0, 1):
            for b in (0, 1):
                transitions[:, a, b] += ((src == a) & (dst == b)).sum(axis=0)
    transitions /= transitions.sum(axis=2, keepdims=True)
    beliefs = (log.sum(axis=0) + 1.0) / (t + 2.0)
    return BeliefState(transitions, beliefs)


def whittle_select(beliefs: BeliefState, k: int) -> ChannelAction:
    """Pick the k channels with the largest beliefs (ties to lowest index).

    For positively correlated two-state arms the index value is monotone in
    the belief, so top-k belief realizes the index policy.
    """
    n = beliefs.beliefs.shape[0]
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < num_channels")
    # stable sort on negated beliefs keeps the lowest index first on ties
    order = np.argsort(-beliefs.beliefs, kind="stable")
    return ChannelAction(tuple(sorted(int(c) for c in order[:k])))


def whittle_update(beliefs: BeliefState, observation: np.ndarray,
                   selected: ChannelAction) -> BeliefState:
    """Snap observed channels to their realized state, then propagate all.

    Observed-good means the observation entry at a selected channel is
    positive. Every channel's belief then advances one step through its
    estimated chain: w' = w*P(G->G) + (1-w)*P(B->G).
    """
    obs = np.asarray(observation, dtype=np.float64)
    w = beliefs.beliefs.copy()
    for c in selected.channels:
        w[c] = 1.0 if obs[c] > 0 else 0.0
    p_gg = beliefs.transitions[:, 1, 1]
    p_bg = beliefs.transitions[:, 0, 1]
    w = w * p_gg + (1.0 - w) * p_bg
    return BeliefState(beliefs.transitions, np.clip(w, 0.0, 1.0))


class WhittleAgent:
    """Belief-index heuristic driven by a calibrated BeliefState."""

    kind = "whittle"

    def __init__(self, num_channels: int, k: int, beliefs: BeliefState):
        if beliefs.beliefs.shape[0] != num_channels:
            raise ValueError("belief width does not match num_channels")
        self.num_channels = num_channels
        self.k = k
        self.beliefs = beliefs
        self._pending: Optional[ChannelAction] = None

    def select(self, rng: np.random.Generator) -> Tuple[ChannelAction, int]:
        action = whittle_select(self.beliefs, self.k)
        self._pending = action
        return action, action_index(action, self.num_channels)

    def learn(self, action_index_taken: int, reward: float,
              next_observation: np.ndarray,
              rng: Optional[np.random.Generator] = None) -> None:
        if self._pending is None:
            raise RuntimeError("learn called before select in this slot")
        self.beliefs = whittle_update(self.beliefs, next_observation, self._pending)
        self._pending = None


# ---------------------------------------------------------------------------
# Genie (pattern-aware optimal play)


class GenieAgent:
    """Myopic optimal policy with full knowledge of the pattern.

    Tracks a guess of the current pattern state and treats a slot as a
    success only when the realized reward equals what the guess predicted
    (so partial overlaps on wide good sets do not fake a confirmation).
    With switch probability p > 0.5 the chain advances on most slots, so a
    confirmed guess moves to the next state and a miss waits in place for
    the chain to walk in. With p < 0.5 staying is the likely move: hold
    after a success, scan forward after a miss. At exactly p = 0.5 the
    agent stays on its guess regardless of outcome.
    """

    kind = "genie"

    def __init__(self, pattern: PatternSpec, k: int):
        self.pattern = pattern
        self.k = k
        self.num_channels = pattern.num_channels
        self._guess = 0   # pattern state we expect NOW
        self._pending: Optional[float] = None   # reward if the guess is right

    def _usable_set(self, state_index: int) -> ChannelAction:
        """Top-k channels of a pattern state, padded from successor states."""
        ranked: List[int] = []
        seen = set()
        s = state_index
        for _ in range(self.pattern.num_states):
            row = self.pattern.states[s]
            # excellent first, then good, lowest index first within each tier
            for tier in (ChannelCondition.EXCELLENT, ChannelCondition.GOOD):
                for c in np.flatnonzero(row == tier):
                    c = int(c)
                    if c not in seen:
                        ranked.append(c)
                        seen.add(c)
            if len(ranked) >= self.k:
                break
            s = (s + 1) % self.pattern.num_states
        for c in range(self.num_channels):   # pattern-wide bad channels, if any
            if len(ranked) >= self.k:
                break
            if c not in seen:
                ranked.append(c)
        return ChannelAction(tuple(sorted(ranked[: self.k])))

    def select(self, rng: np.random.Generator) -> Tuple[ChannelAction, int]:
        action = self._usable_set(self._guess)
        row = self.pattern.states[self._guess]
        self._pending = float(sum(CONDITION_REWARD[ChannelCondition(row[c])]
                                  for c in action.channels))
        return action, action_index(action, self.num_channels)

    def learn(self, action_index_taken: int, reward: float,
              next_observation: np.ndarray,
              rng: Optional[np.random.Generator] = None) -> None:
        if self._pending is None:
            raise RuntimeError("learn called before select in this slot")
        predicted = self._pending
        self._pending = None
        p = self.pattern.switch_prob
        success = abs(reward - predicted) < 1e-9
        if p > 0.5:
            # advancing is the likely move: follow it after a success,
            # else wait for the chain to walk into the tried position
            if success:
                self._guess = (self._guess + 1) % self.pattern.num_states
        elif p < 0.5:
            # staying is the likely move: hold after a success, scan on a miss
            if not success:
                self._guess = (self._guess + 1) % self.pattern.num_states
        # p == 0.5: both moves are even bets; hold the guess for determinism
