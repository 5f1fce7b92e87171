"""Scratch: 64 channels with a 4-state blocked rotation (16 good at a time)."""

import time

from dsalab.agents import AcConfig, DqnConfig
from dsalab.env import make_round_robin
from dsalab.harness import ExperimentConfig, UserSpec, average_reward, evaluation_range, run

OUT = open("probe_n64b.txt", "a", buffering=1)


def note(msg):
    print(msg)
    OUT.write(msg + "\n")


if __name__ == "__main__":
    note("=== n64 goods=16 ===")
    for policy, user in (
            ("ac", UserSpec(policy="ac",
                            ac=AcConfig(lr_actor=0.004, lr_critic=0.020,
                                        decay_rate=0.9, decay_period=25_000))),
            ("dqn", UserSpec(policy="dqn",
                             dqn=DqnConfig(lr=1e-3, epsilon_slots=20_000)))):
        t0 = time.time()
        cfg = ExperimentConfig(pattern=make_round_robin(64, 16, 0.9),
                               users=(user,), horizon=100_000, seed=1,
                               label="n64g16")
        log = run(cfg)
        note(f"n64g16 {policy}: final20="
             f"{average_reward(log, evaluation_range(log)):+.3f} "
             f"({time.time() - t0:.0f}s)")
    note("=== end ===")
