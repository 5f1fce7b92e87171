"""Scratch: settle the multi-user acceptance settings (priority + share)."""

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

OUT = open("probe_crit67.txt", "a", buffering=1)

PATTERN = make_three_state(16, 2, 4, 0.9)

# the primary's doubled rewards double its TD errors and its observation
# scale: lr_critic 0.005 diverged on one stream, so it runs at 0.0025
PRIM_GENTLE = AcConfig(lr_actor=0.001, lr_critic=0.0025,
                       decay_rate=0.9, decay_period=25_000)
SEC_GENTLE = AcConfig(lr_actor=0.002, lr_critic=0.010,
                      decay_rate=0.9, decay_period=25_000)
PRIM_FREEZE = AcConfig(lr_actor=0.001, lr_critic=0.0025,
                       decay_rate=0.8, decay_period=10_000)
SEC_FREEZE = AcConfig(lr_actor=0.004, lr_critic=0.020,
                      decay_rate=0.8, decay_period=10_000)


def note(msg):
    print(msg)
    OUT.write(msg + "\n")


def report(tag, log, nusers=3):
    for u in range(nusers):
        dist = outcome_distribution(log, u, evaluation_range(log))
        coll = dist[OutcomeLabel.COLLISION_EXCELLENT] + dist[OutcomeLabel.COLLISION_GOOD]
        note(f"{tag} u{u}: coll={coll:.4f} "
             f"withP={dist[OutcomeLabel.COLLISION_WITH_PRIMARY]:.4f} "
             f"withS={dist[OutcomeLabel.COLLISION_WITH_SECONDARY]:.4f} "
             f"bad={dist[OutcomeLabel.BAD]:.4f} "
             f"avg={average_reward(log, evaluation_range(log), u):+.3f}")


def crit7_parity(seed):
    """Equal effective rates: primary's doubling cancels its halved rates."""
    t0 = time.time()
    cfg = ExperimentConfig(
        pattern=PATTERN,
        users=(UserSpec(policy="ac", primary=True, ac=PRIM_GENTLE),
               UserSpec(policy="ac", ac=SEC_GENTLE),
               UserSpec(policy="ac", ac=SEC_GENTLE)),
        reward_mode=RewardMode.MULTI_PRIMARY_EXCLUSIVE,
        horizon=150_000, seed=seed, label="prio")
    report(f"crit7c s{seed}", run(cfg))
    note(f"crit7c s{seed} done ({time.time() - t0:.0f}s)")


def crit6_share(tag, seed, horizon, prim, sec):
    t0 = time.time()
    cfg = ExperimentConfig(
        pattern=PATTERN,
        users=(UserSpec(policy="ac", primary=True, ac=prim),
               UserSpec(policy="ac", ac=sec),
               UserSpec(policy="ac", ac=sec)),
        reward_mode=RewardMode.MULTI_PRIMARY_SHARE,
        horizon=horizon, seed=seed, label="mups")
    report(f"crit6b {tag} s{seed}", run(cfg))
    note(f"crit6b {tag} s{seed} done ({time.time() - t0:.0f}s)")


def crit6_dqn(horizon):
    t0 = time.time()
    dqn = DqnConfig(lr=1e-3, epsilon_slots=20_000)
    cfg = ExperimentConfig(
        pattern=PATTERN,
        users=(UserSpec(policy="dqn", primary=True, dqn=dqn),
               UserSpec(policy="dqn", dqn=dqn),
               UserSpec(policy="dqn", dqn=dqn)),
        reward_mode=RewardMode.MULTI_PRIMARY_SHARE,
        horizon=horizon, seed=1, label="mups")
    report(f"crit6b dqn T={horizon}", run(cfg))
    note(f"crit6b dqn T={horizon} done ({time.time() - t0:.0f}s)")


def guarded(fn, *args):
    try:
        fn(*args)
    except ValueError as exc:
        note(f"{fn.__name__}{args}: DIVERGED ({exc})")


if __name__ == "__main__":
    note("=== crit6/7 probes, take 3 ===")
    for seed in (1, 2, 3):
        guarded(crit6_share, "freeze", seed, 150_000, PRIM_FREEZE, SEC_FREEZE)
    for seed in (1, 2):
        guarded(crit7_parity, seed)
    for seed in (1, 2):
        guarded(crit6_share, "gentle", seed, 300_000, PRIM_GENTLE, SEC_GENTLE)
    guarded(crit6_dqn, 150_000)
    guarded(crit6_dqn, 300_000)
    note("=== end ===")
