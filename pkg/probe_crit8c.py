"""Scratch: time-varying recovery with regrouped correlated-subset patterns."""

import time

import numpy as np

from dsalab.agents import AcConfig
from dsalab.env import make_permutation, make_round_robin
from dsalab.harness import ExperimentConfig, UserSpec, run, window_averages

OUT = open("probe_crit8c.txt", "a", buffering=1)


def note(msg):
    print(msg)
    OUT.write(msg + "\n")


def trial(seed, reset, w=150, horizon=150_000):
    perm = np.random.default_rng(19).permutation(16).tolist()
    cfg = ExperimentConfig(
        pattern=make_round_robin(16, 4, 0.9),
        pattern_b=make_permutation(16, 4, 0.9, perm),
        change_slot=500 * w,
        users=(UserSpec(policy="ac", reset_on_negative=reset,
                        ac=AcConfig(lr_actor=0.004, lr_critic=0.020,
                                    decay_rate=0.8, decay_period=10_000)),),
        horizon=horizon, window=w, seed=seed, label="tv16g4")
    log = run(cfg)
    wins = window_averages(log)
    plateau = wins[300:500].mean()
    dip = wins[500:502].min()
    rec = None
    for j in range(500, len(wins) - 5):
        if wins[j:j + 5].mean() >= 0.9 * plateau:
            rec = j - 500
            break
    return plateau, dip, rec, wins[-10:].mean()


if __name__ == "__main__":
    note("=== crit8 regrouped subsets ===")
    for seed in (3, 11):
        for reset in (True, False):
            t0 = time.time()
            plateau, dip, rec, last10 = trial(seed, reset)
            note(f"crit8c s{seed} reset={reset}: plateau={plateau:+.3f} "
                 f"dip2w={dip:+.3f} rec={rec} last10={last10:+.3f} "
                 f"({time.time() - t0:.0f}s)")
    note("=== end ===")
