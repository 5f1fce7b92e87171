"""End-to-end runner, metrics, config documents, op counts, reports."""

import json
import math

import numpy as np
import pytest

from dsalab.agents import AcConfig, DqnConfig
from dsalab.env import (
    ChannelCondition,
    OutcomeLabel,
    PatternSpec,
    RewardMode,
    make_round_robin,
    make_three_state,
)
from dsalab.harness import (
    ExperimentConfig,
    MetricsLog,
    UserSpec,
    average_reward,
    config_from_dict,
    evaluation_range,
    load_config,
    measure_decision_time,
    op_counts,
    outcome_distribution,
    run,
    standard_op_counts,
    window_averages,
)
from dsalab.report import CSV_HEADER, export_csv, render_svg


def _single(policy="random", **cfg_kwargs):
    cfg_kwargs.setdefault("window", 50)
    return ExperimentConfig(pattern=make_round_robin(8, 1, 0.9),
                            users=(UserSpec(policy=policy),), **cfg_kwargs)


# ---------------------------------------------------------------------------
# Config validation


def test_config_rejects_no_users():
    with pytest.raises(ValueError):
        ExperimentConfig(pattern=make_round_robin(4, 1, 0.5), users=())


def test_config_rejects_bad_window():
    with pytest.raises(ValueError):
        _single(horizon=100, window=101)
    with pytest.raises(ValueError):
        _single(horizon=100, window=0)


def test_config_change_slot_pairing():
    with pytest.raises(ValueError):
        _single(horizon=100, change_slot=50)          # pattern_b missing
    with pytest.raises(ValueError):
        ExperimentConfig(pattern=make_round_robin(8, 1, 0.9),
                         users=(UserSpec(policy="random"),),
                         pattern_b=make_round_robin(8, 1, 0.9))
    with pytest.raises(ValueError):
        ExperimentConfig(pattern=make_round_robin(8, 1, 0.9),
                         users=(UserSpec(policy="random"),),
                         pattern_b=make_round_robin(6, 1, 0.9),
                         change_slot=50, horizon=100)  # width mismatch


def test_config_primary_rules():
    users2 = (UserSpec(policy="random", primary=True), UserSpec(policy="random"))
    ExperimentConfig(pattern=make_round_robin(8, 1, 0.9), users=users2,
                     reward_mode=RewardMode.MULTI_PRIMARY_SHARE)
    with pytest.raises(ValueError):   # no primary flagged
        ExperimentConfig(pattern=make_round_robin(8, 1, 0.9),
                         users=(UserSpec(policy="random"),) * 2,
                         reward_mode=RewardMode.MULTI_PRIMARY_SHARE)
    with pytest.raises(ValueError):   # primary outside priority mode
        ExperimentConfig(pattern=make_round_robin(8, 1, 0.9), users=users2,
                         reward_mode=RewardMode.MULTI_SHARE)


def test_config_single_user_mode_takes_one_user():
    with pytest.raises(ValueError):
        ExperimentConfig(pattern=make_round_robin(8, 1, 0.9),
                         users=(UserSpec(policy="random"),) * 2)


def test_config_k_bound():
    with pytest.raises(ValueError):
        ExperimentConfig(pattern=make_round_robin(4, 1, 0.9),
                         users=(UserSpec(policy="random", k=4),))


# ---------------------------------------------------------------------------
# Runs against closed forms


def test_run_genie_matches_closed_form():
    log = run(_single(policy="genie", horizon=20_000, seed=5))
    assert abs(average_reward(log) - 0.8) < 0.02   # 2*max(p,1-p)-1 at p=0.9


def test_run_random_matches_closed_form():
    log = run(_single(policy="random", horizon=20_000, seed=5))
    assert abs(average_reward(log) - (2 * 1 / 8 - 1)) < 0.02   # 2G/N-1


def test_run_is_deterministic_for_a_given_seed():
    cfg = _single(policy="random", horizon=500, seed=9)
    a, b = run(cfg), run(cfg)
    assert np.array_equal(a.rewards, b.rewards)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.action_indices, b.action_indices)


def test_run_seed_changes_stream():
    a = run(_single(policy="random", horizon=500, seed=1))
    b = run(_single(policy="random", horizon=500, seed=2))
    assert not np.array_equal(a.action_indices, b.action_indices)


def test_run_shapes_and_label_range():
    cfg = ExperimentConfig(pattern=make_three_state(8, 1, 2, 0.8),
                           users=(UserSpec(policy="random"),) * 3,
                           reward_mode=RewardMode.MULTI_SHARE,
                           horizon=400, window=50, seed=0)
    log = run(cfg)
    assert log.rewards.shape == (400, 3)
    assert log.labels.min() >= 0 and log.labels.max() < len(OutcomeLabel)
    assert np.all(log.decision_times >= 0)


def test_window_averages_rebuild_total():
    log = run(_single(policy="random", horizon=330, window=50, seed=3))
    wins = window_averages(log)
    assert len(wins) == 6   # trailing 30-slot stub dropped
    assert np.isclose(wins.mean(), log.rewards[:300].mean())


def test_average_reward_bounds_and_errors():
    log = run(_single(policy="random", horizon=100, seed=0))
    assert -1.0 <= average_reward(log) <= 2.0
    with pytest.raises(ValueError):
        average_reward(log, (50, 50))
    with pytest.raises(ValueError):
        average_reward(log, (0, 101))
    with pytest.raises(ValueError):
        average_reward(log, user=1)


def test_evaluation_range_is_final_fifth():
    log = run(_single(policy="random", horizon=1000, seed=0))
    assert evaluation_range(log) == (800, 1000)
    assert evaluation_range(log, fraction=0.5) == (500, 1000)


def test_outcome_distribution_sums_to_one():
    log = run(_single(policy="random", horizon=2000, seed=4))
    dist = outcome_distribution(log, 0)
    assert math.isclose(sum(dist.values()), 1.0)
    assert dist[OutcomeLabel.BAD] > 0.5   # blind access on 1-in-8 goods


def test_outcome_distribution_forced_collisions():
    """Single-state all-good pattern and two belief users: the tie rule parks
    both on channel 0 forever, so every slot is a good-channel collision."""
    pattern = PatternSpec(2, np.full((1, 2), int(ChannelCondition.GOOD),
                                     dtype=np.int8), 0.9)
    cfg = ExperimentConfig(pattern=pattern,
                           users=(UserSpec(policy="whittle"),) * 2,
                           reward_mode=RewardMode.MULTI_SHARE,
                           horizon=300, window=50,
                           whittle_probe_slots=50, seed=0)
    log = run(cfg)
    for u in range(2):
        dist = outcome_distribution(log, u, (0, 300))
        assert dist[OutcomeLabel.COLLISION_GOOD] == 1.0
    assert np.all(log.rewards == 0.5)


def test_custom_collision_discount_reaches_rewards():
    """Same forced-collision run with a harsher split: the per-slot reward
    is the good reward times the configured factor, not the 1/m default."""
    pattern = PatternSpec(2, np.full((1, 2), int(ChannelCondition.GOOD),
                                     dtype=np.int8), 0.9)
    cfg = ExperimentConfig(pattern=pattern,
                           users=(UserSpec(policy="whittle"),) * 2,
                           reward_mode=RewardMode.MULTI_SHARE,
                           horizon=300, window=50,
                           whittle_probe_slots=50, seed=0,
                           collision_discount=lambda m: 0.5 / m)
    log = run(cfg)
    assert np.all(log.rewards == 0.25)


def test_labels_and_rewards_cohere():
    """Bad always pays negative; in share modes only Bad pays negative."""
    cfg = ExperimentConfig(pattern=make_three_state(8, 1, 2, 0.8),
                           users=(UserSpec(policy="random"),) * 3,
                           reward_mode=RewardMode.MULTI_SHARE,
                           horizon=3000, seed=6)
    log = run(cfg)
    bad = log.labels == int(OutcomeLabel.BAD)
    neg = log.rewards < 0
    assert np.all(neg[bad])
    assert np.all(bad[neg])


def test_exclusive_mode_negative_sources():
    """In exclusive mode a negative reward is Bad or a brush with the
    primary, nothing else."""
    users = (UserSpec(policy="random", primary=True),
             UserSpec(policy="random"), UserSpec(policy="random"))
    cfg = ExperimentConfig(pattern=make_three_state(8, 1, 2, 0.8), users=users,
                           reward_mode=RewardMode.MULTI_PRIMARY_EXCLUSIVE,
                           horizon=3000, seed=6)
    log = run(cfg)
    neg = log.rewards < 0
    allowed = np.isin(log.labels, [int(OutcomeLabel.BAD),
                                   int(OutcomeLabel.COLLISION_WITH_PRIMARY)])
    assert np.all(allowed[neg])
    hits = log.labels == int(OutcomeLabel.COLLISION_WITH_PRIMARY)
    assert hits.any()
    assert np.all(log.rewards[hits] == -1.0)
    assert not hits[:, 0].any()   # the primary never carries that label


def test_pattern_change_mid_run():
    perm = [3, 0, 1, 2, 5, 4, 7, 6]
    from dsalab.env import make_permutation
    cfg = ExperimentConfig(pattern=make_round_robin(8, 1, 1.0),
                           pattern_b=make_permutation(8, 1, 1.0, perm),
                           change_slot=100,
                           users=(UserSpec(policy="genie"),),
                           horizon=200, window=50, seed=0)
    log = run(cfg)
    # genie tracks pattern A exactly, then its stale map misses after the swap
    assert np.all(log.rewards[2:100] == 1.0)
    assert average_reward(log, (100, 120)) < 1.0


def test_learning_rate_reset_log():
    """All-bad channels force negative windows; decayed rates snap back."""
    pattern = PatternSpec(3, np.full((1, 3), int(ChannelCondition.BAD),
                                     dtype=np.int8), 0.5)
    ac = AcConfig(omega=2, decay_rate=0.5, decay_period=40)
    cfg = ExperimentConfig(pattern=pattern,
                           users=(UserSpec(policy="ac", ac=ac,
                                           reset_on_negative=True),),
                           horizon=200, window=100, seed=0)
    log = run(cfg)
    resets = [e for e in log.lr_trace if e[0] > 0]
    assert resets
    for slot, user, lr_a, lr_c in resets:
        assert slot % 100 == 0 and user == 0
        assert lr_a == ac.lr_actor and lr_c == ac.lr_critic
    assert np.all(log.rewards == -1.0)


def test_no_reset_without_flag():
    pattern = PatternSpec(3, np.full((1, 3), int(ChannelCondition.BAD),
                                     dtype=np.int8), 0.5)
    ac = AcConfig(omega=2, decay_rate=0.5, decay_period=40)
    cfg = ExperimentConfig(pattern=pattern,
                           users=(UserSpec(policy="ac", ac=ac),),
                           horizon=200, window=100, seed=0)
    log = run(cfg)
    assert [e for e in log.lr_trace if e[0] > 0] == []


# ---------------------------------------------------------------------------
# Config documents


def _doc():
    return {
        "pattern": {"type": "round_robin", "num_channels": 8, "goods": 1,
                    "switch_prob": 0.9},
        "users": [{"policy": "ac",
                   "config": {"omega": 4, "hidden": [32], "lr_actor": 0.001,
                              "lr_critic": 0.005}}],
        "horizon": 1000,
        "window": 100,
        "seed": 7,
        "label": "doc-test",
    }


def test_config_from_dict_round_trip_fields():
    cfg = config_from_dict(_doc())
    assert cfg.horizon == 1000 and cfg.window == 100 and cfg.seed == 7
    assert cfg.users[0].ac.hidden == (32,)
    assert cfg.users[0].ac.lr_actor == 0.001
    assert cfg.pattern.num_channels == 8
    assert cfg.reward_mode == RewardMode.SINGLE_USER


def test_config_from_dict_rejects_unknowns():
    doc = _doc()
    doc["reward_mode"] = "sharing"
    with pytest.raises(ValueError):
        config_from_dict(doc)
    doc = _doc()
    doc["pattern"]["type"] = "zigzag"
    with pytest.raises(ValueError):
        config_from_dict(doc)
    doc = _doc()
    del doc["users"]
    with pytest.raises(ValueError):
        config_from_dict(doc)
    doc = _doc()
    doc["users"][0]["config"]["typo_knob"] = 1
    with pytest.raises((ValueError, TypeError)):
        config_from_dict(doc)


def test_load_config_runs(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(_doc()))
    cfg = load_config(path)
    log = run(cfg)
    assert log.horizon == 1000


def test_config_document_three_state_and_mode():
    doc = {
        "pattern": {"type": "three_state", "num_channels": 6, "excellent": 1,
                    "good": 2, "switch_prob": 0.8},
        "reward_mode": "multi_share",
        "users": [{"policy": "random"}, {"policy": "random", "k": 2}],
        "horizon": 50,
        "window": 10,
    }
    cfg = config_from_dict(doc)
    assert cfg.users[1].k == 2
    run(cfg)


def test_config_document_primary_flag():
    doc = {
        "pattern": {"type": "three_state", "num_channels": 6, "excellent": 1,
                    "good": 2, "switch_prob": 0.8},
        "reward_mode": "multi_primary_exclusive",
        "users": [{"policy": "random", "primary": True},
                  {"policy": "random"}],
        "horizon": 50,
        "window": 10,
    }
    cfg = config_from_dict(doc)
    assert cfg.primary_index == 0
    run(cfg)
    doc["users"][1]["primary"] = True
    with pytest.raises(ValueError):
        config_from_dict(doc)


# ---------------------------------------------------------------------------
# Operation counts


def test_op_counts_hand_oracle():
    # actor 4->2->2: 8+4=12; critic 4->2->1: 8+2=10; dqn 4->2->2: 12
    ac, dqn, ratio = op_counts((4, 2, 2), (4, 2, 1), (4, 2, 2), 2)
    assert (ac, dqn) == (12 + 2 * 10, 2 * 12)
    assert ratio == pytest.approx(32 / 24)


def test_op_counts_second_oracle():
    # single-layer nets: actor 3->2 = 6, critic 3->1 = 3, dqn 3->2 = 6, M=4
    ac, dqn, ratio = op_counts((3, 2), (3, 1), (3, 2), 4)
    assert (ac, dqn, ratio) == (12, 24, 0.5)


def test_op_counts_equal_chains_give_three_over_m():
    dims = (256, 200, 16)
    for m in (8, 32, 64):
        _, _, ratio = op_counts(dims, dims, dims, m)
        assert ratio == pytest.approx(3 / m)


def test_op_counts_errors():
    with pytest.raises(ValueError):
        op_counts((4, 2), (3, 2), (4, 2), 2)   # input width mismatch
    with pytest.raises(ValueError):
        op_counts((4, 2), (4, 2), (4, 2), 0)
    with pytest.raises(ValueError):
        op_counts((4,), (4, 2), (4, 2), 2)


def test_standard_op_counts_structure():
    ac, dqn, ratio = standard_op_counts(16)
    # actor: 256*200 + 200*16; critic: 256*200 + 200*1; dqn adds a hidden layer
    assert ac == (256 * 200 + 200 * 16) + 2 * (256 * 200 + 200)
    assert dqn == 32 * (256 * 200 + 200 * 200 + 200 * 16)
    assert ratio == pytest.approx(ac / dqn)


# ---------------------------------------------------------------------------
# Reports


def test_export_csv_round_trip(tmp_path):
    log = run(_single(policy="random", horizon=120, window=50, seed=2))
    path = tmp_path / "out.csv"
    export_csv(log, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 120
    slot, user, reward, label, action_index, window_avg = lines[1].split(",")
    assert (slot, user) == ("0", "0")
    assert float(reward) == log.rewards[0, 0]
    assert label in {"Bad", "GoodAlone"}   # single user on a goods-only pattern
    assert int(action_index) == log.action_indices[0, 0]
    # the stamped window average is the mean of the slot's own window
    assert float(window_avg) == pytest.approx(log.rewards[:50].mean(), abs=5e-7)
    last = lines[-1].split(",")
    assert float(last[5]) == pytest.approx(log.rewards[100:120].mean(), abs=5e-7)


def test_export_csv_deterministic_bytes(tmp_path):
    log = run(_single(policy="random", horizon=60, window=20, seed=2))
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    export_csv(log, p1)
    export_csv(log, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_export_csv_error_carries_path(tmp_path):
    log = run(_single(policy="random", horizon=10, window=10, seed=0))
    missing = tmp_path / "no_such_dir" / "out.csv"
    with pytest.raises(OSError) as err:
        export_csv(log, missing)
    assert "no_such_dir" in str(err.value)


def test_render_svg_structure(tmp_path):
    xs = list(range(10))
    series = [("learned", xs, [0.1 * x for x in xs]),
              ("blind", xs, [-0.8] * 10)]
    p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
    render_svg(series, p1, title="reward", xlabel="slot", ylabel="avg")
    render_svg(series, p2, title="reward", xlabel="slot", ylabel="avg")
    svg = p1.read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<polyline") == 2
    assert "reward" in svg and "blind" in svg
    assert p1.read_bytes() == p2.read_bytes()


def test_render_svg_escapes_markup(tmp_path):
    path = tmp_path / "esc.svg"
    render_svg([("a<b&c", [0, 1], [0, 1])], path, title="t", xlabel="x",
               ylabel="y")
    svg = path.read_text()
    assert "a<b" not in svg
    assert "a&lt;b&amp;c" in svg


def test_render_svg_rejects_empty(tmp_path):
    with pytest.raises(ValueError):
        render_svg([], tmp_path / "x.svg", title="t")
    with pytest.raises(ValueError):
        render_svg([("s", [0, 1], [0])], tmp_path / "y.svg", title="t")


# ---------------------------------------------------------------------------
# Decision timing


def test_measure_decision_time_smoke():
    ac = measure_decision_time("ac", 4, trials=5, seed=0,
                               ac=AcConfig(omega=2, hidden=(16,)))
    dqn = measure_decision_time("dqn", 4, trials=5, seed=0,
                                dqn=DqnConfig(omega=2, hidden=(16,),
                                              replay_capacity=64, batch=4,
                                              epsilon_slots=1))
    assert ac > 0 and dqn > 0


def test_measure_decision_time_errors():
    with pytest.raises(ValueError):
        measure_decision_time("ac", 4, trials=0)
    with pytest.raises(ValueError):
        measure_decision_time("sarsa", 4, trials=1)
