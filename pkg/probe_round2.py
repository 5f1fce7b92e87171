"""Scratch round 2: settle the remaining acceptance-run settings."""

import time

import numpy as np

from dsalab.agents import AcConfig, DqnConfig
from dsalab.env import OutcomeLabel, RewardMode, make_permutation, make_round_robin, make_three_state
from dsalab.harness import (
    ExperimentConfig,
    UserSpec,
    average_reward,
    evaluation_range,
    outcome_distribution,
    run,
    window_averages,
)

OUT = open("probe_round2.txt", "a", buffering=1)


def note(msg):
    print(msg)
    OUT.write(msg + "\n")


AC_B = dict(lr_actor=0.004, lr_critic=0.020, decay_rate=0.9, decay_period=25_000)


def crit8_restart():
    """Reset now restarts the decay clock; recheck recovery both ways."""
    w = 150
    perm = np.random.default_rng(7).permutation(8).tolist()
    for seed in (3, 11):
        for reset in (True, False):
            t0 = time.time()
            cfg = ExperimentConfig(
                pattern=make_round_robin(8, 1, 0.9),
                pattern_b=make_permutation(8, 1, 0.9, perm),
                change_slot=500 * w,
                users=(UserSpec(policy="ac", reset_on_negative=reset,
                                ac=AcConfig(lr_actor=0.004, lr_critic=0.020,
                                            decay_rate=0.8, decay_period=10_000)),),
                horizon=150_000, window=w, seed=seed, label="tv")
            log = run(cfg)
            wins = window_averages(log)
            plateau = wins[300:500].mean()
            dip = wins[500:502].min()
            rec = None
            for j in range(500, len(wins) - 5):
                if wins[j:j + 5].mean() >= 0.9 * plateau:
                    rec = j - 500
                    break
            note(f"crit8r s{seed} reset={reset}: plateau={plateau:+.3f} "
                 f"dip2w={dip:+.3f} rec={rec} last10={wins[-10:].mean():+.3f} "
                 f"({time.time() - t0:.0f}s)")


def crit4_n64_dense():
    """Blocked 8-good rotation at 64 channels, both learners, same budget."""
    for policy, user in (
            ("ac", UserSpec(policy="ac", ac=AcConfig(**AC_B))),
            ("dqn", UserSpec(policy="dqn",
                             dqn=DqnConfig(lr=1e-3, epsilon_slots=20_000)))):
        t0 = time.time()
        cfg = ExperimentConfig(pattern=make_round_robin(64, 8, 0.9),
                               users=(user,), horizon=100_000, seed=1,
                               label="n64g8")
        log = run(cfg)
        note(f"crit4 n64g8 {policy}: final20="
             f"{average_reward(log, evaluation_range(log)):+.3f} "
             f"({time.time() - t0:.0f}s)")


def crit6_multi_user():
    t0 = time.time()
    pattern = make_three_state(16, 2, 4, 0.9)
    for policy in ("ac", "dqn"):
        if policy == "ac":
            users = tuple(UserSpec(policy="ac", ac=AcConfig(**AC_B))
                          for _ in range(3))
        else:
            users = tuple(UserSpec(policy="dqn",
                                   dqn=DqnConfig(lr=1e-3, epsilon_slots=20_000))
                          for _ in range(3))
        cfg = ExperimentConfig(pattern=pattern, users=users,
                               reward_mode=RewardMode.MULTI_SHARE,
                               horizon=100_000, seed=1, label="mu")
        log = run(cfg)
        for u in range(3):
            dist = outcome_distribution(log, u, evaluation_range(log))
            coll = dist[OutcomeLabel.COLLISION_EXCELLENT] + dist[OutcomeLabel.COLLISION_GOOD]
            note(f"crit6 {policy} u{u}: coll={coll:.4f} bad={dist[OutcomeLabel.BAD]:.4f} "
                 f"avg={average_reward(log, evaluation_range(log), u):+.3f}")
        note(f"crit6 {policy} done ({time.time() - t0:.0f}s)")


def crit7_priority():
    t0 = time.time()
    prim = dict(AC_B, lr_actor=0.001, lr_critic=0.005)
    users = (UserSpec(policy="ac", primary=True, ac=AcConfig(**prim)),
             UserSpec(policy="ac", ac=AcConfig(**AC_B)),
             UserSpec(policy="ac", ac=AcConfig(**AC_B)))
    cfg = ExperimentConfig(pattern=make_three_state(16, 2, 4, 0.9), users=users,
                           reward_mode=RewardMode.MULTI_PRIMARY_EXCLUSIVE,
                           horizon=100_000, seed=1, label="prio")
    log = run(cfg)
    for u in range(3):
        dist = outcome_distribution(log, u, evaluation_range(log))
        note(f"crit7 u{u}{'(P)' if u == 0 else '  '}: "
             f"withP={dist[OutcomeLabel.COLLISION_WITH_PRIMARY]:.4f} "
             f"withS={dist[OutcomeLabel.COLLISION_WITH_SECONDARY]:.4f} "
             f"bad={dist[OutcomeLabel.BAD]:.4f} "
             f"avg={average_reward(log, evaluation_range(log), u):+.3f}")
    note(f"crit7 done ({time.time() - t0:.0f}s)")


def crit5_gentle():
    """Slower start, slower cooling, longer run; same 5 permutations."""
    t0 = time.time()
    finals = []
    for i in range(5):
        perm = np.random.default_rng(101 + i).permutation(16).tolist()
        cfg = ExperimentConfig(
            pattern=make_permutation(16, 1, 0.9, perm),
            users=(UserSpec(policy="ac",
                            ac=AcConfig(lr_actor=0.002, lr_critic=0.010,
                                        decay_rate=0.95, decay_period=25_000)),),
            horizon=500_000, seed=1, label=f"perm{i}")
        log = run(cfg)
        final = average_reward(log, evaluation_range(log))
        finals.append(final)
        note(f"crit5g perm{i}: final20={final:+.3f} ({time.time() - t0:.0f}s)")
    note(f"crit5g range: {max(finals) - min(finals):.3f} min={min(finals):+.3f}")


if __name__ == "__main__":
    note("=== round 2 start ===")
    crit8_restart()
    crit4_n64_dense()
    crit6_multi_user()
    crit7_priority()
    crit5_gentle()
    note("=== round 2 end ===")
