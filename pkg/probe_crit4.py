"""Scratch: single-user reference setting through the real harness seeding."""

import time

from dsalab.agents import AcConfig
from dsalab.env import make_round_robin
from dsalab.harness import ExperimentConfig, UserSpec, average_reward, evaluation_range, run

OUT = open("probe_crit4.txt", "a", buffering=1)

for seed in (1, 2, 3):
    t0 = time.time()
    cfg = ExperimentConfig(
        pattern=make_round_robin(16, 1, 0.9),
        users=(UserSpec(policy="ac",
                        ac=AcConfig(lr_actor=0.004, lr_critic=0.020,
                                    decay_rate=0.9, decay_period=25_000)),),
        horizon=200_000, seed=seed, label="c4")
    log = run(cfg)
    msg = (f"c4 n16 seed={seed}: final20="
           f"{average_reward(log, evaluation_range(log)):+.3f} "
           f"({time.time() - t0:.0f}s)")
    print(msg)
    OUT.write(msg + "\n")
