"""Scratch: decay schedules that let the agent re-learn after the change."""

import time

import numpy as np

from dsalab.agents import AcConfig
from dsalab.env import make_permutation, make_round_robin
from dsalab.harness import ExperimentConfig, UserSpec, run, window_averages

OUT = open("probe_crit8b.txt", "a", buffering=1)


def note(msg):
    print(msg)
    OUT.write(msg + "\n")


def trial(decay_rate, decay_period, seed=3):
    w = 150
    perm = np.random.default_rng(7).permutation(8).tolist()
    for reset in (True, False):
        t0 = time.time()
        cfg = ExperimentConfig(
            pattern=make_round_robin(8, 1, 0.9),
            pattern_b=make_permutation(8, 1, 0.9, perm),
            change_slot=500 * w,
            users=(UserSpec(policy="ac", reset_on_negative=reset,
                            ac=AcConfig(lr_actor=0.004, lr_critic=0.020,
                                        decay_rate=decay_rate,
                                        decay_period=decay_period)),),
            horizon=225_000, window=w, seed=seed, label="tv")
        log = run(cfg)
        wins = window_averages(log)
        plateau = wins[300:500].mean()
        dip = wins[500:502].min()
        rec = None
        for j in range(500, len(wins) - 5):
            if wins[j:j + 5].mean() >= 0.9 * plateau:
                rec = j - 500
                break
        note(f"d{decay_rate}/{decay_period} seed={seed} reset={reset}: "
             f"plateau={plateau:+.3f} dip2w={dip:+.3f} rec={rec} "
             f"last10={wins[-10:].mean():+.3f} ({time.time() - t0:.0f}s)")


if __name__ == "__main__":
    note("=== crit8 decay ladder ===")
    trial(0.9, 15_000)
    trial(0.9, 10_000)
    note("=== end ===")
