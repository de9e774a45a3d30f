"""Distinguishing binary strings within edit distance k from deletion-channel traces."""
from .bitstr import (
    IndicatorVector,
    EditDistanceReport,
    edit_ball_membership,
    extend_to_nonperiodic,
    first_diff_index,
    has_period,
    in_runlength_class,
    indicator_vector,
    is_non_periodic,
    sample_from_edit_ball,
)
from .channel import (
    ChannelParam,
    StatisticSpec,
    Trace,
    empirical_statistic,
    exact_statistic_expectation,
    exact_trace_distribution,
    transmit,
    verify_mbs_identity,
)
from .poly import (
    Certificate,
    IntPolynomial,
    coefficient_l1_check,
    deflate,
    divisibility_order,
    eval_f,
    find_separating_power,
    circle_search,
    segment_gap_search,
    power_sum,
    prefix_power_sum,
)
from .distinguish import (
    ExperimentConfig,
    ExperimentResult,
    PipelinePlan,
    build_plan,
    decide,
    run_experiment,
    scaling_sweep,
)

__version__ = "0.1.0"
