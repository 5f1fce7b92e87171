"""Scratch: share mode with a strictly discouraging collision discount."""

import time

from dsalab.agents import AcConfig, DqnConfig
from dsalab.env import OutcomeLabel, RewardMode, make_three_state
from dsalab.harness import (
    ExperimentConfig,
    UserSpec,
    average_reward,
    evaluation_range,
    outcome_distribution,
    run,
)

OUT = open("probe_crit6c.txt", "a", buffering=1)

PATTERN = make_three_state(16, 2, 4, 0.9)

PRIM = AcConfig(lr_actor=0.001, lr_critic=0.0025,
                decay_rate=0.8, decay_period=10_000)
SEC = AcConfig(lr_actor=0.004, lr_critic=0.020,
               decay_rate=0.8, decay_period=10_000)


def half_share(m: int) -> float:
    """Half of the equal split: a shared channel pays strictly less than a
    clean channel one grade down."""
    return 0.5 / m


def note(msg):
    print(msg)
    OUT.write(msg + "\n")


def report(tag, log):
    for u in range(3):
        dist = outcome_distribution(log, u, evaluation_range(log))
        coll = dist[OutcomeLabel.COLLISION_EXCELLENT] + dist[OutcomeLabel.COLLISION_GOOD]
        note(f"{tag} u{u}: coll={coll:.4f} bad={dist[OutcomeLabel.BAD]:.4f} "
             f"avg={average_reward(log, evaluation_range(log), u):+.3f}")


def ac_leg(seed):
    t0 = time.time()
    cfg = ExperimentConfig(
        pattern=PATTERN,
        users=(UserSpec(policy="ac", primary=True, ac=PRIM),
               UserSpec(policy="ac", ac=SEC),
               UserSpec(policy="ac", ac=SEC)),
        reward_mode=RewardMode.MULTI_PRIMARY_SHARE,
        collision_discount=half_share,
        horizon=150_000, seed=seed, label="halfshare")
    report(f"crit6c ac s{seed}", run(cfg))
    note(f"crit6c ac s{seed} done ({time.time() - t0:.0f}s)")


def dqn_leg(seed):
    t0 = time.time()
    dqn = DqnConfig(lr=1e-3, epsilon_slots=20_000)
    cfg = ExperimentConfig(
        pattern=PATTERN,
        users=(UserSpec(policy="dqn", primary=True, dqn=dqn),
               UserSpec(policy="dqn", dqn=dqn),
               UserSpec(policy="dqn", dqn=dqn)),
        reward_mode=RewardMode.MULTI_PRIMARY_SHARE,
        collision_discount=half_share,
        horizon=150_000, seed=seed, label="halfshare")
    report(f"crit6c dqn s{seed}", run(cfg))
    note(f"crit6c dqn s{seed} done ({time.time() - t0:.0f}s)")


if __name__ == "__main__":
    note("=== crit6 half-share discount ===")
    for seed in (1, 2, 3):
        try:
            ac_leg(seed)
        except ValueError as exc:
            note(f"ac s{seed} DIVERGED ({exc})")
    dqn_leg(1)
    note("=== end ===")
