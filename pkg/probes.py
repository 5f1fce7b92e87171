"""Scratch sweep used to pick desk-scale settings for the acceptance runs."""

import time

import numpy as np

from dsalab.agents import AcConfig, DqnConfig
from dsalab.env import RewardMode, make_permutation, make_round_robin, make_three_state
from dsalab.harness import (
    ExperimentConfig,
    UserSpec,
    average_reward,
    evaluation_range,
    outcome_distribution,
    run,
    window_averages,
)
from dsalab.env import OutcomeLabel

OUT = open("probe_results.txt", "a", buffering=1)


def note(msg):
    print(msg)
    OUT.write(msg + "\n")


AC_B = dict(lr_actor=0.004, lr_critic=0.020, decay_rate=0.9, decay_period=25_000)


def crit5_permutations():
    t0 = time.time()
    finals = []
    for i in range(5):
        perm = np.random.default_rng(101 + i).permutation(16).tolist()
        cfg = ExperimentConfig(
            pattern=make_permutation(16, 1, 0.9, perm),
            users=(UserSpec(policy="ac", ac=AcConfig(**AC_B)),),
            horizon=300_000, seed=1, label=f"perm{i}")
        log = run(cfg)
        final = average_reward(log, evaluation_range(log))
        finals.append(final)
        note(f"crit5 perm{i}: final20={final:+.3f}")
    note(f"crit5 range over perms: {max(finals) - min(finals):.3f} "
         f"min={min(finals):+.3f} ({time.time() - t0:.0f}s)")


def crit8_time_varying():
    t0 = time.time()
    w = 150
    perm = np.random.default_rng(7).permutation(8).tolist()
    for reset in (True, False):
        cfg = ExperimentConfig(
            pattern=make_round_robin(8, 1, 0.9),
            pattern_b=make_permutation(8, 1, 0.9, perm),
            change_slot=500 * w,
            users=(UserSpec(policy="ac", reset_on_negative=reset,
                            ac=AcConfig(decay_rate=0.8, decay_period=10_000,
                                        **{k: v for k, v in AC_B.items()
                                           if k.startswith("lr")})),),
            horizon=225_000, window=w, seed=3, label="tv")
        log = run(cfg)
        wins = window_averages(log)
        plateau = wins[300:500].mean()
        dip = wins[500:502].min()
        rec = None
        for j in range(500, len(wins) - 5):
            if wins[j:j + 5].mean() >= 0.9 * plateau:
                rec = j - 500
                break
        note(f"crit8 reset={reset}: plateau={plateau:+.3f} dip2w={dip:+.3f} "
             f"recovery_windows={rec} last10={wins[-10:].mean():+.3f}")
    note(f"crit8 done ({time.time() - t0:.0f}s)")


def dqn16_lr():
    t0 = time.time()
    for lr in (5e-4, 1e-3):
        cfg = ExperimentConfig(
            pattern=make_round_robin(16, 1, 0.9),
            users=(UserSpec(policy="dqn", dqn=DqnConfig(lr=lr, epsilon_slots=20_000)),),
            horizon=100_000, seed=1, label="dqn16")
        log = run(cfg)
        note(f"dqn16 lr={lr}: final20={average_reward(log, evaluation_range(log)):+.3f} "
             f"({time.time() - t0:.0f}s)")


def crit4_n64(dqn_lr):
    t0 = time.time()
    for policy in ("ac", "dqn"):
        user = (UserSpec(policy="ac", ac=AcConfig(**AC_B)) if policy == "ac"
                else UserSpec(policy="dqn",
                              dqn=DqnConfig(lr=dqn_lr, epsilon_slots=20_000)))
        cfg = ExperimentConfig(pattern=make_round_robin(64, 1, 0.9),
                               users=(user,), horizon=100_000, seed=1,
                               label="n64")
        log = run(cfg)
        note(f"crit4 n64 {policy}: final20="
             f"{average_reward(log, evaluation_range(log)):+.3f} "
             f"({time.time() - t0:.0f}s)")


def crit6_multi_user(dqn_lr):
    t0 = time.time()
    pattern = make_three_state(16, 2, 4, 0.9)
    for policy in ("ac", "dqn"):
        if policy == "ac":
            users = tuple(UserSpec(policy="ac", ac=AcConfig(**AC_B))
                          for _ in range(3))
        else:
            users = tuple(UserSpec(policy="dqn",
                                   dqn=DqnConfig(lr=dqn_lr, epsilon_slots=30_000))
                          for _ in range(3))
        cfg = ExperimentConfig(pattern=pattern, users=users,
                               reward_mode=RewardMode.MULTI_SHARE,
                               horizon=150_000, seed=1, label="mu")
        log = run(cfg)
        for u in range(3):
            dist = outcome_distribution(log, u)
            coll = dist[OutcomeLabel.COLLISION_EXCELLENT] + dist[OutcomeLabel.COLLISION_GOOD]
            note(f"crit6 {policy} u{u}: coll={coll:.4f} bad={dist[OutcomeLabel.BAD]:.4f} "
                 f"avg={average_reward(log, evaluation_range(log), u):+.3f}")
        note(f"crit6 {policy} done ({time.time() - t0:.0f}s)")


def crit7_priority():
    # the primary's doubled rewards need a gentler critic step to stay finite
    t0 = time.time()
    prim = dict(AC_B, lr_actor=0.001, lr_critic=0.005)
    users = (UserSpec(policy="ac", primary=True, ac=AcConfig(**prim)),
             UserSpec(policy="ac", ac=AcConfig(**AC_B)),
             UserSpec(policy="ac", ac=AcConfig(**AC_B)))
    cfg = ExperimentConfig(pattern=make_three_state(16, 2, 4, 0.9), users=users,
                           reward_mode=RewardMode.MULTI_PRIMARY_EXCLUSIVE,
                           horizon=150_000, seed=1, label="prio")
    log = run(cfg)
    for u in range(3):
        dist = outcome_distribution(log, u)
        note(f"crit7 u{u}{'(P)' if u == 0 else '  '}: "
             f"withP={dist[OutcomeLabel.COLLISION_WITH_PRIMARY]:.4f} "
             f"withS={dist[OutcomeLabel.COLLISION_WITH_SECONDARY]:.4f} "
             f"bad={dist[OutcomeLabel.BAD]:.4f} "
             f"avg={average_reward(log, evaluation_range(log), u):+.3f}")
    note(f"crit7 done ({time.time() - t0:.0f}s)")


if __name__ == "__main__":
    note("=== probe battery start ===")
    crit5_permutations()
    crit8_time_varying()
    dqn16_lr()
    crit4_n64(5e-4)
    crit6_multi_user(5e-4)
    crit7_priority()
    note("=== probe battery end ===")
