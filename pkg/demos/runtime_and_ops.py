"""Why the actor-critic decides faster than the replay learner.

Per slot, the actor-critic pays one actor pass plus two critic passes; a
replay learner pays a full minibatch of passes. With equal network chains
that is a 3/M operation ratio. This script prints the analytic multiply
counts and then measures actual per-decision wall time at several channel
counts.

Run:  python3 demos/runtime_and_ops.py [trials]
"""

import sys

from dsalab.harness import measure_decision_time, standard_op_counts

TRIALS = int(sys.argv[1]) if len(sys.argv) > 1 else 300
CHANNEL_COUNTS = (16, 32, 64)
MINIBATCH = 32


def main():
    print("analytic multiply counts per slot (200-neuron nets, omega=16)")
    print(f"{'N':>4} {'actor+2*critic':>16} {'minibatch dqn':>15} {'ratio':>8} "
          f"{'3/M':>8}")
    for n in CHANNEL_COUNTS:
        ac_ops, dqn_ops, ratio = standard_op_counts(n, minibatch=MINIBATCH)
        print(f"{n:>4} {ac_ops:>16,} {dqn_ops:>15,} {ratio:>8.4f} "
              f"{3 / MINIBATCH:>8.4f}")
    print("(the dqn chain carries a second hidden layer, so its ratio sits "
          "below the equal-chain 3/M)")

    print(f"\nmeasured seconds per decision ({TRIALS} trials)")
    print(f"{'N':>4} {'actor-critic':>14} {'dqn':>12} {'reduction':>10}")
    for n in CHANNEL_COUNTS:
        t_ac = measure_decision_time("ac", n, TRIALS)
        t_dqn = measure_decision_time("dqn", n, TRIALS)
        print(f"{n:>4} {t_ac:>14.6f} {t_dqn:>12.6f} "
              f"{100 * (1 - t_ac / t_dqn):>9.1f}%")


if __name__ == "__main__":
    main()
