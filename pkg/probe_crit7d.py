"""Scratch: exclusive priority with desk secondaries, longer cooling."""

import time

from dsalab.agents import AcConfig
from dsalab.env import OutcomeLabel, RewardMode, make_three_state
from dsalab.harness import (
    ExperimentConfig,
    UserSpec,
    average_reward,
    evaluation_range,
    outcome_distribution,
    run,
)

OUT = open("probe_crit7d.txt", "a", buffering=1)

PRIM = AcConfig(lr_actor=0.001, lr_critic=0.005,
                decay_rate=0.9, decay_period=25_000)
DESK = AcConfig(lr_actor=0.004, lr_critic=0.020,
                decay_rate=0.9, decay_period=25_000)


def note(msg):
    print(msg)
    OUT.write(msg + "\n")


if __name__ == "__main__":
    note("=== crit7 desk secondaries, T=150k ===")
    for seed in (1, 2, 3):
        t0 = time.time()
        cfg = ExperimentConfig(
            pattern=make_three_state(16, 2, 4, 0.9),
            users=(UserSpec(policy="ac", primary=True, ac=PRIM),
                   UserSpec(policy="ac", ac=DESK),
                   UserSpec(policy="ac", ac=DESK)),
            reward_mode=RewardMode.MULTI_PRIMARY_EXCLUSIVE,
            horizon=150_000, seed=seed, label="prio")
        try:
            log = run(cfg)
        except ValueError as exc:
            note(f"crit7d s{seed} DIVERGED ({exc})")
            continue
        for u in range(3):
            dist = outcome_distribution(log, u, evaluation_range(log))
            note(f"crit7d s{seed} u{u}{'(P)' if u == 0 else '  '}: "
                 f"withP={dist[OutcomeLabel.COLLISION_WITH_PRIMARY]:.4f} "
                 f"withS={dist[OutcomeLabel.COLLISION_WITH_SECONDARY]:.4f} "
                 f"bad={dist[OutcomeLabel.BAD]:.4f} "
                 f"avg={average_reward(log, evaluation_range(log), u):+.3f}")
        note(f"crit7d s{seed} done ({time.time() - t0:.0f}s)")
    note("=== end ===")
