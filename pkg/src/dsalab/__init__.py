"""Dynamic multichannel access laboratory.

A correlated Markov channel environment, a from-scratch dense network core,
learning and heuristic access policies, and a reproducible experiment
harness with CSV/SVG reporting.
"""

from dsalab.env import (
    ChannelAction,
    ChannelCondition,
    EnvState,
    OutcomeLabel,
    PatternSpec,
    RewardMode,
    StepOutcome,
    action_from_index,
    action_index,
    default_collision_discount,
    load_pattern,
    make_permutation,
    make_round_robin,
    make_three_state,
    num_actions,
    observe,
    reverse_pattern,
    save_pattern,
    step,
    transition,
)
from dsalab.numerics import (
    ForwardTrace,
    Mlp,
    actor_update,
    critic_update,
    forward,
    grad_check,
    init_mlp,
    load_weights,
    save_weights,
    softmax,
)
from dsalab.agents import (
    AcAgent,
    AcConfig,
    DqnAgent,
    DqnConfig,
    GenieAgent,
    ObservationStack,
    RandomAgent,
    WhittleAgent,
)
from dsalab.harness import (
    ExperimentConfig,
    MetricsLog,
    UserSpec,
    average_reward,
    evaluation_range,
    load_config,
    measure_decision_time,
    op_counts,
    outcome_distribution,
    run,
    standard_op_counts,
    window_averages,
)
from dsalab.report import export_csv, render_svg

__version__ = "0.1.0"
