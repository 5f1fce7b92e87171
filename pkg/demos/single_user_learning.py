"""One user hunting a moving good channel.

Sixteen channels, one good at a time, the good slot hops to the next channel
with probability 0.9 each step. The actor-critic learner starts blind and has
to discover the rotation from reward feedback alone. Random access and the
belief heuristic bracket it from below, the genie (which knows the pattern)
from above.

Run:  python3 demos/single_user_learning.py [slots]
Writes demo_output/single_user/ (CSV per policy plus a comparison chart).
"""

import os
import sys

import numpy as np

from dsalab.agents import AcConfig
from dsalab.env import make_round_robin
from dsalab.harness import (
    ExperimentConfig,
    UserSpec,
    average_reward,
    evaluation_range,
    run,
    window_averages,
)
from dsalab.report import export_csv, render_svg

SLOTS = int(sys.argv[1]) if len(sys.argv) > 1 else 120_000
CHANNELS = 16
SWITCH_PROB = 0.9
WINDOW = 500
OUT_DIR = "demo_output/single_user"

# learning rates sized for runs of ~10^5 slots; see AcConfig for the
# long-horizon defaults
AC = AcConfig(lr_actor=0.004, lr_critic=0.020, decay_rate=0.9,
              decay_period=25_000)

POLICIES = [
    ("actor-critic", UserSpec(policy="ac", ac=AC)),
    ("whittle", UserSpec(policy="whittle")),
    ("random", UserSpec(policy="random")),
    ("genie", UserSpec(policy="genie")),
]


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    pattern = make_round_robin(CHANNELS, 1, SWITCH_PROB)
    series = []
    print(f"{SLOTS} slots, {CHANNELS} channels, p={SWITCH_PROB}")
    for name, user in POLICIES:
        cfg = ExperimentConfig(pattern=pattern, users=(user,), horizon=SLOTS,
                               window=WINDOW, seed=2, label=name)
        log = run(cfg)
        final = average_reward(log, evaluation_range(log))
        print(f"  {name:<13} final-20% average reward {final:+.3f}")
        export_csv(log, os.path.join(OUT_DIR, f"{name.replace('-', '_')}.csv"))
        curve = window_averages(log)
        x = (np.arange(len(curve)) + 1) * WINDOW
        series.append((name, x, curve))
    render_svg(series, os.path.join(OUT_DIR, "comparison.svg"),
               title=f"single user, {CHANNELS} channels, p={SWITCH_PROB}",
               xlabel="slot", ylabel=f"reward ({WINDOW}-slot window)")
    print(f"wrote {OUT_DIR}/comparison.svg")
    print("closed forms: genie 2*max(p,1-p)-1 = "
          f"{2 * max(SWITCH_PROB, 1 - SWITCH_PROB) - 1:+.3f}, "
          f"random 2*G/N-1 = {2 / CHANNELS - 1:+.3f}")


if __name__ == "__main__":
    main()
