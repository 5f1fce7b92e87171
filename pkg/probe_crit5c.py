"""Scratch: permutation robustness on the denser 4-good pattern."""

import time

import numpy as np

from dsalab.agents import AcConfig
from dsalab.env import make_permutation
from dsalab.harness import ExperimentConfig, UserSpec, average_reward, evaluation_range, run

OUT = open("probe_crit5c.txt", "a", buffering=1)


def note(msg):
    print(msg)
    OUT.write(msg + "\n")


if __name__ == "__main__":
    note("=== crit5 goods=4 perms ===")
    t0 = time.time()
    finals = []
    for i in range(5):
        perm = np.random.default_rng(101 + i).permutation(16).tolist()
        cfg = ExperimentConfig(
            pattern=make_permutation(16, 4, 0.9, perm),
            users=(UserSpec(policy="ac",
                            ac=AcConfig(lr_actor=0.004, lr_critic=0.020,
                                        decay_rate=0.9, decay_period=25_000)),),
            horizon=150_000, seed=1, label=f"perm{i}")
        log = run(cfg)
        final = average_reward(log, evaluation_range(log))
        finals.append(final)
        note(f"crit5c perm{i}: final20={final:+.3f} ({time.time() - t0:.0f}s)")
    note(f"crit5c range: {max(finals) - min(finals):.3f} "
         f"min={min(finals):+.3f} max={max(finals):+.3f}")
    note("=== end ===")
