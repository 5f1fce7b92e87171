"""Scratch: short pre-change phase to limit policy collapse before the change."""

import time

import numpy as np

from dsalab.agents import AcConfig
from dsalab.env import make_permutation, make_round_robin
from dsalab.harness import ExperimentConfig, UserSpec, run, window_averages

OUT = open("probe_crit8d.txt", "a", buffering=1)


def note(msg):
    print(msg)
    OUT.write(msg + "\n")


def trial(seed, reset, w, horizon, decay_rate, decay_period):
    perm = np.random.default_rng(19).permutation(16).tolist()
    cfg = ExperimentConfig(
        pattern=make_round_robin(16, 4, 0.9),
        pattern_b=make_permutation(16, 4, 0.9, perm),
        change_slot=500 * w,
        users=(UserSpec(policy="ac", reset_on_negative=reset,
                        ac=AcConfig(lr_actor=0.004, lr_critic=0.020,
                                    decay_rate=decay_rate,
                                    decay_period=decay_period)),),
        horizon=horizon, window=w, seed=seed, label="tv")
    log = run(cfg)
    wins = window_averages(log)
    plateau = wins[300:500].mean()
    dip = wins[500:502].min()
    rec = None
    for j in range(500, len(wins) - 5):
        if wins[j:j + 5].mean() >= 0.9 * plateau:
            rec = j - 500
            break
    n_resets = len([e for e in log.lr_trace if e[0] > 0])
    return plateau, dip, rec, wins[-10:].mean(), n_resets


if __name__ == "__main__":
    note("=== crit8 short pre-change ===")
    for w, horizon, drate, dper in ((60, 60_000, 0.5, 10_000),
                                    (60, 60_000, 0.6, 8_000)):
        for seed in (3, 11):
            for reset in (True, False):
                t0 = time.time()
                plateau, dip, rec, last10, nr = trial(seed, reset, w, horizon,
                                                      drate, dper)
                note(f"W={w} d{drate}/{dper} s{seed} reset={reset}: "
                     f"plateau={plateau:+.3f} dip2w={dip:+.3f} rec={rec} "
                     f"last10={last10:+.3f} resets={nr} ({time.time() - t0:.0f}s)")
    note("=== end ===")
