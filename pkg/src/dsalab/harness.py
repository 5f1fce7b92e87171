"""Experiment harness: configuration, the slot loop, and metrics.

One ``run`` executes a full experiment: every user selects a channel set,
the environment resolves the joint action, every user learns (two-phase, so
no agent sees slot t+1 data inside slot t), and everything lands in a
``MetricsLog``. Time-varying experiments swap the pattern mid-run without
telling the agents. Whittle users get a calibration probe before slot 0.

Derived metrics live here too: windowed and range averages, per-user
outcome distributions, the analytic per-slot multiply counts for the
network architectures, and wall-clock per-decision timing. Experiment
configs round-trip through a JSON document (see ``config_from_dict``).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from dsalab.env import (
    ChannelAction,
    ChannelCondition,
    EnvState,
    OutcomeLabel,
    PatternSpec,
    RewardMode,
    default_collision_discount,
    make_permutation,
    make_round_robin,
    make_three_state,
    pattern_from_dict,
    step,
    transition,
)
from dsalab.agents import (
    AcAgent,
    AcConfig,
    DqnAgent,
    DqnConfig,
    GenieAgent,
    RandomAgent,
    WhittleAgent,
    whittle_estimate,
)

POLICY_KINDS = ("ac", "dqn", "random", "whittle", "genie")


@dataclass
class UserSpec:
    """One user's policy and its knobs."""

    policy: str
    k: int = 1
    primary: bool = False
    reset_on_negative: bool = False   # re-inflate learning rates on a bad window
    ac: Optional[AcConfig] = None
    dqn: Optional[DqnConfig] = None

    def __post_init__(self):
        if self.policy not in POLICY_KINDS:
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")


@dataclass
class ExperimentConfig:
    pattern: PatternSpec
    users: List[UserSpec]
    horizon: int = 200_000
    window: int = 500
    seed: int = 0
    reward_mode: RewardMode = RewardMode.SINGLE_USER
    pattern_b: Optional[PatternSpec] = None
    change_slot: Optional[int] = None
    whittle_probe_slots: int = 10_000
    label: str = ""
    # shared-channel payoff scaling, m occupants -> factor; JSON documents
    # always use the default equal split
    collision_discount: Callable[[int], float] = default_collision_discount

    def __post_init__(self):
        if not self.users:
            raise ValueError("need at least one user")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if self.window < 1 or self.window > self.horizon:
            raise ValueError("window must lie in [1, horizon]")
        if (self.pattern_b is None) != (self.change_slot is None):
            raise ValueError("pattern_b and change_slot come together")
        if self.change_slot is not None:
            if not 0 < self.change_slot < self.horizon:
                raise ValueError("change_slot must lie inside (0, horizon)")
            if self.pattern_b.num_channels != self.pattern.num_channels:
                raise ValueError("patterns must share num_channels")
        priority = self.reward_mode in (RewardMode.MULTI_PRIMARY_SHARE,
                                        RewardMode.MULTI_PRIMARY_EXCLUSIVE)
        primaries = sum(u.primary for u in self.users)
        if priority and primaries != 1:
            raise ValueError("priority modes require exactly one primary user")
        if not priority and primaries:
            raise ValueError("primary flag set without a priority reward mode")
        if self.reward_mode == RewardMode.SINGLE_USER and len(self.users) != 1:
            raise ValueError("single-user mode takes exactly one user")
        for u in self.users:
            if u.k >= self.pattern.num_channels:
                raise ValueError("k must be smaller than num_channels")

    @property
    def primary_index(self) -> Optional[int]:
        for i, u in enumerate(self.users):
            if u.primary:
                return i
        return None


@dataclass
class MetricsLog:
    """Everything a run produced, slot-aligned."""

    rewards: np.ndarray          # (T, U) float64
    labels: np.ndarray           # (T, U) int8 OutcomeLabel values
    action_indices: np.ndarray   # (T, U) int64
    decision_times: np.ndarray   # (T, U) float32 seconds of select+learn
    lr_trace: List[Tuple[int, int, float, float]]   # (slot, user, lr_actor, lr_critic)
    window: int
    config: Optional[ExperimentConfig] = None

    @property
    def horizon(self) -> int:
        return self.rewards.shape[0]

    @property
    def num_users(self) -> int:
        return self.rewards.shape[1]


def _build_agent(spec: UserSpec, config: ExperimentConfig, seed: int,
                 rng: np.random.Generator):
    n = config.pattern.num_channels
    if spec.policy == "ac":
        return AcAgent(n, spec.k, spec.ac or AcConfig(), seed)
    if spec.policy == "dqn":
        # exploration anneals over the first fifth of the run unless pinned
        cfg = spec.dqn or DqnConfig(epsilon_slots=max(1, config.horizon // 5))
        return DqnAgent(n, spec.k, cfg, seed)
    if spec.policy == "random":
        return RandomAgent(n, spec.k)
    if spec.policy == "genie":
        return GenieAgent(config.pattern, spec.k)
    # whittle: calibrate from a dedicated probe of the true chain, the only
    # point where full per-channel visibility is granted
    probe_state = EnvState(config.pattern, 0, 0)
    probe = np.zeros((config.whittle_probe_slots, n), dtype=np.int8)
    for t in range(config.whittle_probe_slots):
        probe[t] = (probe_state.conditions != ChannelCondition.BAD)
        probe_state = transition(probe_state, rng)
    return WhittleAgent(n, spec.k, whittle_estimate(probe))


def run(config: ExperimentConfig) -> MetricsLog:
    """Execute one experiment and return its metrics.

    Per slot all users select, the environment steps once, then all users
    learn from their own outcome. At ``change_slot`` the pattern is swapped
    silently. At every window boundary, users flagged ``reset_on_negative``
    whose window average went negative get their learning rates restored to
    initial values (which also restarts their decay clock).
    """
    seeds = np.random.SeedSequence(config.seed).spawn(len(config.users) + 2)
    env_rng = np.random.default_rng(seeds[0])
    probe_rng = np.random.default_rng(seeds[1])
    agent_rngs = [np.random.default_rng(s) for s in seeds[2:]]
    # agent init weights come from the master seed too, offset per user
    agents = [_build_agent(u, config, config.seed * 1009 + 17 * i, probe_rng)
              for i, u in enumerate(config.users)]

    t_total, n_users = config.horizon, len(config.users)
    rewards = np.zeros((t_total, n_users))
    labels = np.zeros((t_total, n_users), dtype=np.int8)
    action_indices = np.zeros((t_total, n_users), dtype=np.int64)
    decision_times = np.zeros((t_total, n_users), dtype=np.float32)
    lr_trace: List[Tuple[int, int, float, float]] = []
    for i, agent in enumerate(agents):
        if isinstance(agent, AcAgent):
            lr_trace.append((0, i, agent.lr_actor, agent.lr_critic))

    env_state = EnvState(config.pattern, 0, 0)
    primary_index = config.primary_index

    for t in range(t_total):
        if config.change_slot is not None and t == config.change_slot:
            env_state = EnvState(config.pattern_b,
                                 env_state.state_index % config.pattern_b.num_states,
                                 env_state.slot)

        actions = []
        indices = []
        for i, agent in enumerate(agents):
            tick = time.perf_counter()
            action, index = agent.select(agent_rngs[i])
            decision_times[t, i] = time.perf_counter() - tick
            actions.append(action)
            indices.append(index)

        outcome, env_state = step(env_state, actions, env_rng,
                                  mode=config.reward_mode,
                                  primary_index=primary_index,
                                  collision_discount=config.collision_discount)

        for i, agent in enumerate(agents):
            tick = time.perf_counter()
            agent.learn(indices[i], float(outcome.per_user_reward[i]),
                        outcome.per_user_observation[i], agent_rngs[i])
            decision_times[t, i] += time.perf_counter() - tick

        rewards[t] = outcome.per_user_reward
        labels[t] = [int(lbl) for lbl in outcome.labels]
        action_indices[t] = indices

        if (t + 1) % config.window == 0:
            window_slice = rewards[t + 1 - config.window:t + 1]
            for i, (user, agent) in enumerate(zip(config.users, agents)):
                if not (user.reset_on_negative and isinstance(agent, AcAgent)):
                    continue
                if window_slice[:, i].mean() < 0 and (
                        agent.lr_actor != agent.config.lr_actor
                        or agent.lr_critic != agent.config.lr_critic):
                    agent.reset_learning_rates()
                    lr_trace.append((t + 1, i, agent.lr_actor, agent.lr_critic))

    return MetricsLog(rewards, labels, action_indices, decision_times,
                      lr_trace, config.window, config)


# ---------------------------------------------------------------------------
# Metrics


def average_reward(log: MetricsLog, slot_range: Optional[Tuple[int, int]] = None,
                   user: Optional[int] = None) -> float:
    """Mean per-slot reward over [lo, hi); all users summed unless one is given."""
    lo, hi = slot_range if slot_range is not None else (0, log.horizon)
    if not 0 <= lo < hi <= log.horizon:
        raise ValueError(f"empty or out-of-bounds range [{lo}, {hi})")
    block = log.rewards[lo:hi]
    if user is None:
        return float(block.sum(axis=1).mean())
    if not 0 <= user < log.num_users:
        raise ValueError(f"unknown user {user}")
    return float(block[:, user].mean())


def evaluation_range(log: MetricsLog, fraction: float = 0.2) -> Tuple[int, int]:
    """The final-``fraction`` slice of the horizon, used for reported averages."""
    lo = int(round(log.horizon * (1.0 - fraction)))
    return max(0, min(lo, log.horizon - 1)), log.horizon


def window_averages(log: MetricsLog, user: Optional[int] = None) -> np.ndarray:
    """Mean reward of each completed W-slot window (trailing partial dropped)."""
    w = log.window
    count = log.horizon // w
    per_slot = (log.rewards.sum(axis=1) if user is None else log.rewards[:, user])
    return per_slot[:count * w].reshape(count, w).mean(axis=1)


def outcome_distribution(log: MetricsLog, user: int,
                         slot_range: Optional[Tuple[int, int]] = None
                         ) -> Dict[OutcomeLabel, float]:
    """Empirical frequency of each outcome label over the evaluation range."""
    if not 0 <= user < log.num_users:
        raise ValueError(f"unknown user {user}")
    lo, hi = slot_range if slot_range is not None else evaluation_range(log)
    if not 0 <= lo < hi <= log.horizon:
        raise ValueError(f"empty or out-of-bounds range [{lo}, {hi})")
    block = log.labels[lo:hi, user]
    total = hi - lo
    return {lbl: float((block == int(lbl)).sum()) / total for lbl in OutcomeLabel}


# ---------------------------------------------------------------------------
# Config documents (JSON)


_REWARD_MODES = {
    "single_user": RewardMode.SINGLE_USER,
    "multi_share": RewardMode.MULTI_SHARE,
    "multi_primary_share": RewardMode.MULTI_PRIMARY_SHARE,
    "multi_primary_exclusive": RewardMode.MULTI_PRIMARY_EXCLUSIVE,
}


def _pattern_from_doc(doc: dict) -> PatternSpec:
    kind = doc.get("type")
    if kind == "round_robin":
        return make_round_robin(int(doc["num_channels"]), int(doc["goods"]),
                                float(doc["switch_prob"]))
    if kind == "permutation":
        return make_permutation(int(doc["num_channels"]), int(doc["goods"]),
                                float(doc["switch_prob"]), doc["permutation"])
    if kind == "three_state":
        return make_three_state(int(doc["num_channels"]), int(doc["excellent"]),
                                int(doc["good"]), float(doc["switch_prob"]))
    if kind == "explicit":
        return pattern_from_dict(doc)
    if kind == "file":
        with open(doc["path"]) as fh:
            return pattern_from_dict(json.load(fh))
    raise ValueError(f"unknown pattern type {kind!r}")


def _user_from_doc(doc: dict) -> UserSpec:
    policy = doc.get("policy")
    knobs = doc.get("config", {}) or {}
    if "hidden" in knobs:
        knobs["hidden"] = tuple(knobs["hidden"])
    ac = AcConfig(**knobs) if policy == "ac" else None
    dqn = DqnConfig(**knobs) if policy == "dqn" else None
    return UserSpec(policy, k=int(doc.get("k", 1)),
                    primary=bool(doc.get("primary", False)),
                    reset_on_negative=bool(doc.get("reset_on_negative", False)),
                    ac=ac, dqn=dqn)


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from its JSON document form.

    Raises ValueError on anything malformed; field names mirror
    ExperimentConfig, patterns are constructor descriptions (type
    round_robin / permutation / three_state / explicit / file).
    """
    try:
        mode_name = doc.get("reward_mode", "single_user")
        if mode_name not in _REWARD_MODES:
            raise ValueError(f"unknown reward_mode {mode_name!r}")
        pattern_b = doc.get("pattern_b")
        return ExperimentConfig(
            pattern=_pattern_from_doc(doc["pattern"]),
            users=[_user_from_doc(u) for u in doc["users"]],
            horizon=int(doc.get("horizon", 200_000)),
            window=int(doc.get("window", 500)),
            seed=int(doc.get("seed", 0)),
            reward_mode=_REWARD_MODES[mode_name],
            pattern_b=_pattern_from_doc(pattern_b) if pattern_b else None,
            change_slot=(int(doc["change_slot"])
                         if doc.get("change_slot") is not None else None),
            whittle_probe_slots=int(doc.get("whittle_probe_slots", 10_000)),
            label=str(doc.get("label", "")),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad experiment config: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Analytic operation counts


def _chain_ops(dims: Sequence[int]) -> int:
    dims = [int(d) for d in dims]
    if len(dims) < 2 or any(d <= 0 for d in dims):
        raise ValueError("dims must chain at least input -> output, all positive")
    return sum(a * b for a, b in zip(dims[:-1], dims[1:]))


def op_counts(actor_dims: Sequence[int], critic_dims: Sequence[int],
              dqn_dims: Sequence[int], minibatch: int
              ) -> Tuple[int, int, float]:
    """Per-slot multiply counts for both frameworks and their ratio.

    Dim chains include the input width. The actor-critic side pays one
    actor pass plus two critic passes per slot; the minibatch side pays
    ``minibatch`` passes of its network. Returns (ac, dqn, ac/dqn).
    """
    if minibatch < 1:
        raise ValueError("minibatch must be positive")
    if not (actor_dims[0] == critic_dims[0] == dqn_dims[0]):
        raise ValueError("all networks must share the input width")
    ac = _chain_ops(actor_dims) + 2 * _chain_ops(critic_dims)
    dqn = minibatch * _chain_ops(dqn_dims)
    return ac, dqn, ac / dqn


def standard_op_counts(num_channels: int, omega: int = 16, hidden: int = 200,
                       minibatch: int = 32) -> Tuple[int, int, float]:
    """op_counts for the reference architectures at a given channel count."""
    k = num_channels * omega
    return op_counts((k, hidden, num_channels), (k, hidden, 1),
                     (k, hidden, hidden, num_channels), minibatch)


# ---------------------------------------------------------------------------
# Wall-clock timing


def measure_decision_time(kind: str, num_channels: int, trials: int,
                          k: int = 1, seed: int = 0,
                          ac: Optional[AcConfig] = None,
                          dqn: Optional[DqnConfig] = None) -> float:
    """Mean wall-clock seconds of one select+learn, environment excluded.

    The agent is warmed up first (a DQN agent's replay is filled past one
    batch) so the measured slots all pay the full learning cost.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    pattern = make_round_robin(num_channels, 1, 0.9)
    config = ExperimentConfig(pattern, [UserSpec(kind, k=k, ac=ac, dqn=dqn)],
                              horizon=max(trials, 2), window=1, seed=seed)
    rng = np.random.default_rng(seed)
    agent = _build_agent(config.users[0], config, seed, rng)
    env_state = EnvState(pattern, 0, 0)

    warmup = (agent.config.batch + 8) if isinstance(agent, DqnAgent) else 8
    elapsed = 0.0
    for t in range(warmup + trials):
        tick = time.perf_counter()
        action, index = agent.select(rng)
        took = time.perf_counter() - tick
        outcome, env_state = step(env_state, [action], rng)
        tick = time.perf_counter()
        agent.learn(index, float(outcome.per_user_reward[0]),
                    outcome.per_user_observation[0], rng)
        took += time.perf_counter() - tick
        if t >= warmup:
            elapsed += took
    return elapsed / trials
