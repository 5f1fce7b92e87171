"""Scratch: why do permutation plateaus differ, and does harder cooling fix it."""

import time

import numpy as np

from dsalab.agents import AcAgent, AcConfig
from dsalab.env import EnvState, action_from_index, make_permutation, step
from dsalab.numerics import forward
from dsalab.harness import ExperimentConfig, UserSpec, average_reward, evaluation_range, run

OUT = open("probe_crit5b.txt", "a", buffering=1)


def note(msg):
    print(msg)
    OUT.write(msg + "\n")


def learn_then_greedy(perm_seed, decay_rate, decay_period, horizon):
    pattern = make_permutation(16, 1, 0.9,
                               np.random.default_rng(perm_seed).permutation(16).tolist())
    cfg = AcConfig(lr_actor=0.004, lr_critic=0.020,
                   decay_rate=decay_rate, decay_period=decay_period)
    agent = AcAgent(16, 1, cfg, seed=1)
    rng = np.random.default_rng(perm_seed * 31 + 5)
    state = EnvState(pattern, 0, 0)
    total_tail = 0.0
    tail_start = int(horizon * 0.8)
    entropy_acc = 0.0
    for t in range(horizon):
        action, index = agent.select(rng)
        out, state = step(state, [action], rng)
        r = float(out.per_user_reward[0])
        agent.learn(index, r, out.per_user_observation[0])
        if t >= tail_start:
            total_tail += r
            probs, _ = forward(agent.actor, agent.stack.flatten())
            entropy_acc += -float(np.sum(probs * np.log(probs)))
    sample_avg = total_tail / (horizon - tail_start)
    entropy = entropy_acc / (horizon - tail_start)

    greedy_total = 0.0
    eval_slots = 20_000
    for _ in range(eval_slots):
        probs, _ = forward(agent.actor, agent.stack.flatten())
        index = int(np.argmax(probs))
        action = action_from_index(index, 16, 1)
        out, state = step(state, [action], rng)
        greedy_total += float(out.per_user_reward[0])
        agent.stack.push(out.per_user_observation[0])
    return sample_avg, entropy, greedy_total / eval_slots


if __name__ == "__main__":
    note("=== crit5 diagnosis ===")
    for perm_seed in (102, 104):   # the worst and best permutations so far
        t0 = time.time()
        s, h, g = learn_then_greedy(perm_seed, 0.9, 25_000, 300_000)
        note(f"perm{perm_seed - 101} d0.9/25k: sample={s:+.3f} entropy={h:.3f} "
             f"greedy={g:+.3f} ({time.time() - t0:.0f}s)")
    for perm_seed in (102, 104):
        t0 = time.time()
        s, h, g = learn_then_greedy(perm_seed, 0.9, 15_000, 300_000)
        note(f"perm{perm_seed - 101} d0.9/15k: sample={s:+.3f} entropy={h:.3f} "
             f"greedy={g:+.3f} ({time.time() - t0:.0f}s)")
    note("=== end ===")
