import math
import random
from fractions import Fraction

import numpy as np
import pytest

from tracedist.bitstr import as_bits, in_runlength_class, indicator_vector, is_non_periodic
from tracedist.channel import ChannelParam, StatisticSpec, exact_statistic_expectation, sample_traces
from tracedist.distinguish import (
    MAIN,
    SMALL_T0_FALLBACK,
    ExperimentConfig,
    best_statistic,
    build_plan,
    decide,
    decide_value,
    exhaustive_family,
    hoeffding_samples,
    run_experiment,
    sample_pair,
    scaling_sweep,
    window_family,
)
from tracedist.poly import find_separating_power


def test_hoeffding_example():
    assert hoeffding_samples(0.1, 0.05) == 738
    with pytest.raises(ValueError):
        hoeffding_samples(0.0, 0.05)


def test_single_index_gap_example():
    x, y = as_bits("10"), as_bits("01")
    ch = ChannelParam(Fraction(1, 2))
    spec, ex, ey, gap = best_statistic(x, y, [StatisticSpec("1", (1,))], ch)
    assert (ex, ey, gap) == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))


def _main_pair(t0, n=40, seed=0):
    rng = random.Random(seed)
    y = [rng.randint(0, 1) for _ in range(n)]
    x = list(y)
    # swapping two adjacent unequal bits is one deletion plus one insertion
    while x[t0 - 1] == x[t0]:
        x[t0] = 1 - x[t0]
        y[t0] = x[t0]
    x[t0 - 1], x[t0] = x[t0], x[t0 - 1]
    return tuple(x), tuple(y)


def test_plan_main_structure():
    x, y = _main_pair(17)
    plan = build_plan(x, y, 1, ChannelParam(0.2))
    assert plan.mode == MAIN and plan.t0 == 17
    assert len(plan.w) == 12 and is_non_periodic(plan.w)
    assert plan.w[:11] == x[5:16]
    u, v = indicator_vector(x, plan.w), indicator_vector(y, plan.w)
    assert u[plan.t0 - 12] != v[plan.t0 - 12]
    assert in_runlength_class(u, 6) and in_runlength_class(v, 6)
    assert find_separating_power(u, v, 13) in range(1, 14)
    assert plan.gap > 0
    assert plan.N >= math.ceil(2 * math.log(2 / 0.05) / plan.gap ** 2)
    assert plan.chosen in window_family(plan.w, len(x))


def test_plan_fallback():
    x, y = _main_pair(3)
    plan = build_plan(x, y, 1, ChannelParam(0.2))
    assert plan.mode == SMALL_T0_FALLBACK
    assert len(plan.chosen.indices) <= 2
    assert plan.gap == pytest.approx(float(abs(plan.e_x - plan.e_y)))


def test_plan_errors():
    with pytest.raises(ValueError):
        build_plan("0101", "0101", 1, ChannelParam(0.2))
    with pytest.raises(ValueError):
        build_plan("0000", "1111", 1, ChannelParam(0.2))


def test_fallback_beats_every_short_statistic():
    x, y = _main_pair(4, n=10, seed=3)
    ch = ChannelParam(0.25)
    plan = build_plan(x, y, 1, ch)
    for spec in plan.family:
        gap = abs(exact_statistic_expectation(x, spec, ch) - exact_statistic_expectation(y, spec, ch))
        assert gap <= plan.gap + 1e-12


def test_windows_against_exhaustive_oracle():
    """The window family never beats the full tuple search; record how much it loses."""
    ch = ChannelParam(0.2)
    losses = []
    for seed in range(3):
        x, y = _main_pair(13, n=15, seed=seed)
        win = build_plan(x, y, 1, ch, family="windows")
        full = build_plan(x, y, 1, ch, family="exhaustive")
        assert len(full.family) == math.comb(15, 12)
        assert full.gap >= win.gap > 0
        losses.append(full.gap / win.gap)
    assert all(r >= 1 for r in losses)


def test_exhaustive_family_guard():
    with pytest.raises(ValueError):
        exhaustive_family((1,) * 12, 40)


def test_sampled_family_contains_windows():
    x, y = _main_pair(20, n=30)
    plan = build_plan(x, y, 1, ChannelParam(0.2), family="sampled", budget=100, rng_seed=1)
    assert len(plan.family) == 100
    win = build_plan(x, y, 1, ChannelParam(0.2))
    assert plan.gap >= win.gap


def test_decide_exact_value_and_tie():
    x, y = _main_pair(17)
    plan = build_plan(x, y, 1, ChannelParam(0.2))
    assert decide_value(float(plan.e_x), plan) == "X"
    assert decide_value(float(plan.e_y), plan) == "Y"
    assert decide_value((float(plan.e_x) + float(plan.e_y)) / 2, plan) == "X"


def test_decide_noiseless_single_trace():
    x, y = _main_pair(17)
    ch = ChannelParam(0.0)
    plan = build_plan(x, y, 1, ch)
    assert decide(sample_traces(x, ch, 1, 0), plan) == "X"
    assert decide(sample_traces(y, ch, 1, 0), plan) == "Y"


def test_decide_permutation_invariant():
    x, y = _main_pair(17)
    ch = ChannelParam(0.3)
    plan = build_plan(x, y, 1, ch)
    traces = sample_traces(x, ch, 500, 1)
    shuffled = list(traces)
    random.Random(2).shuffle(shuffled)
    assert decide(traces, plan) == decide(shuffled, plan)


def test_decide_with_planned_sample_size():
    x, y = _main_pair(8, n=20, seed=4)
    ch = ChannelParam(0.2)
    plan = build_plan(x, y, 1, ch, delta=0.05)
    wrong = 0
    for trial in range(100):
        if decide(sample_traces(x, ch, plan.N, trial), plan) != "X":
            wrong += 1
    assert wrong <= 10


def test_sample_pair_distinct():
    rng = random.Random(0)
    for _ in range(50):
        x, y = sample_pair(12, 1, rng)
        assert x != y and len(x) == len(y) == 12


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(n=10, k=0, q=0.2)
    with pytest.raises(ValueError):
        ExperimentConfig(n=10, k=1, q=1.2)
    with pytest.raises(ValueError):
        ExperimentConfig(n=10, k=1, q=0.2, family="bogus")
    cfg = ExperimentConfig(n=10, k=1, q="1/5")
    assert cfg.q == Fraction(1, 5) and cfg.to_json()["q"] == "1/5"


def test_noiseless_experiment_has_no_errors():
    res = run_experiment(ExperimentConfig(n=24, k=2, q=0.0, trials=10, seed=3))
    assert res.error_rate == 0


def test_experiment_deterministic():
    cfg = ExperimentConfig(n=20, k=1, q=0.2, trials=4, seed=11)
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a.records == b.records and a.error_rate == b.error_rate


def test_experiment_thread_count_irrelevant():
    cfg = ExperimentConfig(n=16, k=1, q=0.2, trials=3, seed=5)
    assert run_experiment(cfg, threads=1).records == run_experiment(cfg, threads=2).records


def test_experiment_json():
    res = run_experiment(ExperimentConfig(n=16, k=1, q=0.1, trials=2, seed=1, N=50))
    out = res.to_json()
    assert out["error_rate"] == out["errors"] / out["trials"]
    assert all(r["N"] == 50 for r in out["records"])


def test_sweep_single_point_and_columns():
    res = scaling_sweep([16], [1], [0.2], trials=2, seed=1)
    lines = res.to_csv().strip().splitlines()
    assert len(lines) == 2
    assert lines[0].split(",") == ["n", "k", "q", "gap", "N", "error_rate", "seed"]
    assert all(len(l.split(",")) == 7 for l in lines)


def test_sweep_slope_reported():
    res = scaling_sweep([16, 32], [1], [0.2], trials=3, seed=2)
    assert 1 in res.slopes and np.isfinite(res.slopes[1])


def test_binomial_shortcut_keeps_plans():
    """Above the simulation budget the verdicts come from the binomial hit count."""
    base = dict(n=20, k=1, q=0.2, trials=6, seed=7)
    sim = run_experiment(ExperimentConfig(**base))
    fast = run_experiment(ExperimentConfig(**base, max_simulated=0))
    assert all(r.sampler == "binomial" for r in fast.records)
    assert all(r.sampler == "traces" for r in sim.records)
    assert [r.gap for r in sim.records] == [r.gap for r in fast.records]
    assert fast.error_rate <= 0.5
