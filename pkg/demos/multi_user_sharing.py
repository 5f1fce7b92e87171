"""Three independent learners carving up a shared spectrum.

The pattern rotates two excellent and four good channels through sixteen
positions. Nobody coordinates: each user sees only its own access feedback,
and a collision splits the channel reward. Watch the collision rate fall as
the three actor-critic users settle onto disjoint channels.

Run:  python3 demos/multi_user_sharing.py [slots]
Writes demo_output/multi_user/.
"""

import os
import sys

import numpy as np

from dsalab.agents import AcConfig
from dsalab.env import OutcomeLabel, RewardMode, make_three_state
from dsalab.harness import (
    ExperimentConfig,
    UserSpec,
    average_reward,
    evaluation_range,
    outcome_distribution,
    run,
    window_averages,
)
from dsalab.report import LABEL_NAMES, export_csv, render_svg

SLOTS = int(sys.argv[1]) if len(sys.argv) > 1 else 60_000
WINDOW = 500
OUT_DIR = "demo_output/multi_user"

AC = AcConfig(lr_actor=0.004, lr_critic=0.020, decay_rate=0.9,
              decay_period=25_000)


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    pattern = make_three_state(16, 2, 4, 0.9)
    users = tuple(UserSpec(policy="ac", ac=AC) for _ in range(3))
    cfg = ExperimentConfig(pattern=pattern, users=users,
                           reward_mode=RewardMode.MULTI_SHARE,
                           horizon=SLOTS, window=WINDOW, seed=2,
                           label="3 users, shared access")
    log = run(cfg)
    export_csv(log, os.path.join(OUT_DIR, "run.csv"))

    print(f"{SLOTS} slots, 3 users, 2 excellent + 4 good of 16 channels")
    print(f"{'outcome':<24}" + "".join(f"user {u:>2}   " for u in range(3)))
    dists = [outcome_distribution(log, u) for u in range(3)]
    for label in OutcomeLabel:
        row = "".join(f"{dists[u][label]:>9.4f}" for u in range(3))
        print(f"{LABEL_NAMES[label]:<24}{row}")
    for u in range(3):
        final = average_reward(log, evaluation_range(log), user=u)
        coll = (dists[u][OutcomeLabel.COLLISION_EXCELLENT]
                + dists[u][OutcomeLabel.COLLISION_GOOD])
        print(f"user {u}: final-20% average {final:+.3f}, "
              f"collision share {coll:.4f}")

    series = []
    for u in range(3):
        curve = window_averages(log, user=u)
        x = (np.arange(len(curve)) + 1) * WINDOW
        series.append((f"user {u}", x, curve))
    render_svg(series, os.path.join(OUT_DIR, "per_user.svg"),
               title="3 users sharing 16 channels",
               xlabel="slot", ylabel=f"reward ({WINDOW}-slot window)")
    print(f"wrote {OUT_DIR}/per_user.svg")


if __name__ == "__main__":
    main()
