"""Recovering when the world changes underneath the learner.

Sixteen channels move as four perfectly correlated subsets of four, rotating
one subset per state. Halfway through the run the cycle direction reverses:
every successor relation the agent learned is suddenly wrong and the window
average crashes. Two copies of the same agent differ in one switch: one may
snap its decayed learning rates back to their initial values when a window
goes negative, the other keeps crawling at the decayed rates. Both relearn
the reversed cycle, but the reset version gets back to its old level several
times faster.

Run:  python3 demos/pattern_change.py [slots]
Writes demo_output/pattern_change/.
"""

import os
import sys

import numpy as np

from dsalab.agents import AcConfig
from dsalab.env import make_round_robin, reverse_pattern
from dsalab.harness import ExperimentConfig, UserSpec, run, window_averages
from dsalab.report import render_svg

SLOTS = int(sys.argv[1]) if len(sys.argv) > 1 else 150_000
WINDOW = 150
CHANGE_SLOT = 500 * WINDOW   # 75,000
CHANNELS = 16
OUT_DIR = "demo_output/pattern_change"

# decay fast enough that the rates have visibly shrunk by the change point;
# that is what makes the reset worth something
AC = AcConfig(lr_actor=0.004, lr_critic=0.020, decay_rate=0.8,
              decay_period=10_000)


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    pattern_a = make_round_robin(CHANNELS, 4, 0.9)
    pattern_b = reverse_pattern(pattern_a)

    series = []
    for reset in (True, False):
        cfg = ExperimentConfig(
            pattern=pattern_a, pattern_b=pattern_b, change_slot=CHANGE_SLOT,
            users=(UserSpec(policy="ac", ac=AC, reset_on_negative=reset),),
            horizon=SLOTS, window=WINDOW, seed=3,
            label="with reset" if reset else "no reset")
        log = run(cfg)
        wins = window_averages(log)
        x = (np.arange(len(wins)) + 1) * WINDOW
        series.append((cfg.label, x, wins))
        resets = [e for e in log.lr_trace if e[0] > 0]
        plateau = wins[300:500].mean()
        recovery = next((j - 500 for j in range(500, len(wins) - 5)
                         if wins[j:j + 5].mean() >= 0.9 * plateau), None)
        print(f"{cfg.label}: pre-change plateau {plateau:+.3f}, "
              f"rate resets fired {len(resets)}, "
              f"back to 90% after {recovery} windows, "
              f"last 10 windows {wins[-10:].mean():+.3f}")

    render_svg(series, os.path.join(OUT_DIR, "recovery.svg"),
               title=f"cycle direction reversed at slot {CHANGE_SLOT}",
               xlabel="slot", ylabel=f"reward ({WINDOW}-slot window)")
    print(f"wrote {OUT_DIR}/recovery.svg")


if __name__ == "__main__":
    main()
