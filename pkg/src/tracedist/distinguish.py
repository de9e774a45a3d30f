"""Two-hypothesis testing between strings within edit distance k."""
from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bitstr import (
    Bits,
    BitsLike,
    as_bits,
    edit_ball_membership,
    extend_to_nonperiodic,
    first_diff_index,
    sample_from_edit_ball,
    substring,
    to_str,
)
from .channel import (
    ChannelParam,
    Prob,
    StatisticSpec,
    Trace,
    empirical_statistic,
    exact_statistic_expectation,
    pair_table,
    parse_q,
    position_marginals,
    statistic_hits,
)

log = logging.getLogger(__name__)

MAIN = "MAIN"
SMALL_T0_FALLBACK = "SMALL_T0_FALLBACK"
FAMILIES = ("windows", "exhaustive", "sampled")
EXHAUSTIVE_LIMIT = 5000
MAX_RESAMPLES = 1000


def hoeffding_samples(gap: float, delta: float) -> int:
    """N = ceil(2 ln(2/delta) / gap^2): two-sided Hoeffding at margin gap/2."""
    if gap <= 0:
        raise ValueError("gap must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return math.ceil(2 * math.log(2 / delta) / gap ** 2)


@dataclass
class PipelinePlan:
    t0: int
    w: Bits
    family: list[StatisticSpec]
    chosen: StatisticSpec
    e_x: Prob
    e_y: Prob
    gap: float
    N: int
    mode: str
    delta: float

    def to_json(self) -> dict:
        return {
            "t0": self.t0,
            "w": to_str(self.w),
            "family_size": len(self.family),
            "chosen": self.chosen.to_dict(),
            "e_x": float(self.e_x),
            "e_y": float(self.e_y),
            "gap": self.gap,
            "N": self.N,
            "mode": self.mode,
            "delta": self.delta,
        }


def window_family(w: Bits, n: int) -> list[StatisticSpec]:
    return [StatisticSpec.window(w, i) for i in range(1, n - len(w) + 2)]


def exhaustive_family(w: Bits, n: int) -> list[StatisticSpec]:
    count = math.comb(n, len(w))
    if count > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive family has {count} tuples (limit {EXHAUSTIVE_LIMIT})")
    return [StatisticSpec(w, idx) for idx in itertools.combinations(range(1, n + 1), len(w))]


def sampled_family(w: Bits, n: int, budget: int, rng: random.Random) -> list[StatisticSpec]:
    seen = {spec.indices for spec in window_family(w, n)}
    out = window_family(w, n)
    total = math.comb(n, len(w))
    while len(out) < min(budget, total):
        idx = tuple(sorted(rng.sample(range(1, n + 1), len(w))))
        if idx not in seen:
            seen.add(idx)
            out.append(StatisticSpec(w, idx))
    return out


def best_statistic(x: BitsLike, y: BitsLike, family: Sequence[StatisticSpec], ch: ChannelParam):
    """(spec, E_x, E_y, gap) maximizing the exact gap over ``family``."""
    x, y = as_bits(x), as_bits(y)
    best = None
    for spec in family:
        ex = exact_statistic_expectation(x, spec, ch)
        ey = exact_statistic_expectation(y, spec, ch)
        gap = abs(ex - ey)
        if best is None or gap > best[3]:
            best = (spec, ex, ey, gap)
    return best


def _best_short(x: Bits, y: Bits, ch: ChannelParam):
    """Best single- or two-bit statistic over every position and pattern."""
    n = len(x)
    family = [StatisticSpec((b,), (i,)) for i in range(1, n + 1) for b in (0, 1)]
    family += [
        StatisticSpec((b1, b2), (i1, i2))
        for i1, i2 in itertools.combinations(range(1, n + 1), 2)
        for b1 in (0, 1)
        for b2 in (0, 1)
    ]
    single = np.abs(position_marginals(x, ch) - position_marginals(y, ch))
    pairs = np.abs(pair_table(x, ch) - pair_table(y, ch))
    i, b = np.unravel_index(np.argmax(single), single.shape)
    spec, gap = StatisticSpec((int(b),), (int(i) + 1,)), single[i, b]
    b1, b2, i1, i2 = np.unravel_index(np.argmax(pairs), pairs.shape)
    if pairs[b1, b2, i1, i2] > gap:
        spec = StatisticSpec((int(b1), int(b2)), (int(i1) + 1, int(i2) + 1))
    ex = exact_statistic_expectation(x, spec, ch)
    ey = exact_statistic_expectation(y, spec, ch)
    return family, spec, ex, ey, abs(ex - ey)


def build_plan(
    x: BitsLike,
    y: BitsLike,
    k: int,
    ch: ChannelParam,
    delta: float = 0.05,
    family: str = "windows",
    budget: int = 2000,
    rng_seed=None,
) -> PipelinePlan:
    """Pick the statistic with the largest exact gap between the hypotheses."""
    x, y = as_bits(x), as_bits(y)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    t0 = first_diff_index(x, y)
    if t0 is None:
        raise ValueError("x and y are identical")
    ok, rep = edit_ball_membership(x, y, k)
    if not ok:
        raise ValueError(f"x is not within edit distance {k} of y: {rep}")
    width = 12 * k
    if t0 >= width:
        w = extend_to_nonperiodic(substring(x, t0 - width + 1, t0 - 1))
        n = len(x)
        if family == "windows":
            specs = window_family(w, n)
        elif family == "exhaustive":
            specs = exhaustive_family(w, n)
        else:
            rng = rng_seed if isinstance(rng_seed, random.Random) else random.Random(rng_seed)
            specs = sampled_family(w, n, budget, rng)
        spec, ex, ey, gap = best_statistic(x, y, specs, ch)
        mode = MAIN
    else:
        specs, spec, ex, ey, gap = _best_short(x, y, ch)
        w = spec.pattern
        mode = SMALL_T0_FALLBACK
    gap = float(gap)
    if gap <= 0:
        raise ValueError(f"no separating statistic in the {family} family")
    return PipelinePlan(t0, w, specs, spec, ex, ey, gap, hoeffding_samples(gap, delta), mode, delta)


def decide_value(value: float, plan: PipelinePlan) -> str:
    """X if the empirical value is at least as close to E_x as to E_y.

    The comparison is against the midpoint itself so an exact tie lands on X.
    """
    ex, ey = float(plan.e_x), float(plan.e_y)
    mid = (ex + ey) / 2
    if ex >= ey:
        return "X" if value >= mid else "Y"
    return "X" if value <= mid else "Y"


def decide(traces: Sequence[Trace], plan: PipelinePlan) -> str:
    return decide_value(empirical_statistic(traces, plan.chosen), plan)


@dataclass
class ExperimentConfig:
    n: int
    k: int
    q: Prob
    delta: float = 0.05
    trials: int = 100
    seed: int = 0
    N: int | None = None
    family: str = "windows"
    budget: int = 2000
    # beyond this many traces the hit count is drawn from its exact binomial law
    max_simulated: int = 2_000_000

    def __post_init__(self):
        self.q = parse_q(self.q)
        ChannelParam(self.q)
        if self.n < 1 or self.k < 1 or self.k > self.n:
            raise ValueError("need 1 <= k <= n")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.N is not None and self.N < 1:
            raise ValueError("N must be positive")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.max_simulated < 0:
            raise ValueError("max_simulated must be non-negative")

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        return cls(**data)

    def to_json(self) -> dict:
        out = asdict(self)
        out["q"] = str(self.q) if isinstance(self.q, Fraction) else self.q
        return out


@dataclass
class TrialRecord:
    trial: int
    x: str
    y: str
    mode: str
    t0: int
    gap: float
    N: int
    verdict_x: str
    verdict_y: str
    sampler: str = "traces"

    @property
    def error(self) -> bool:
        return self.verdict_x != "X" or self.verdict_y != "Y"


@dataclass
class ExperimentResult:
    trials: int
    errors: int
    error_rate: float
    measured_gap: float
    min_gap: float
    median_N: int
    wall_time: float
    config: ExperimentConfig
    records: list[TrialRecord] = field(default_factory=list)

    def to_json(self, with_records: bool = True) -> dict:
        out = {
            "trials": self.trials,
            "errors": self.errors,
            "error_rate": self.error_rate,
            "measured_gap": self.measured_gap,
            "min_gap": self.min_gap,
            "median_N": self.median_N,
            "wall_time": self.wall_time,
            "config": self.config.to_json(),
        }
        if with_records:
            out["records"] = [asdict(r) | {"error": r.error} for r in self.records]
        return out


def sample_pair(n: int, k: int, rng: random.Random) -> tuple[Bits, Bits]:
    """Random y and a distinct x in its radius-k edit ball."""
    for _ in range(MAX_RESAMPLES):
        y = tuple(rng.randint(0, 1) for _ in range(n))
        x = sample_from_edit_ball(y, k, rng)
        if x != y:
            return x, y
    raise RuntimeError("could not draw a distinct pair")


def run_trial(config: ExperimentConfig, trial: int) -> TrialRecord:
    ss = np.random.SeedSequence([config.seed, trial])
    pair_seed, sample_seed = ss.spawn(2)
    rng = random.Random(int(pair_seed.generate_state(1)[0]))
    x, y = sample_pair(config.n, config.k, rng)
    ch = ChannelParam(config.q)
    plan = build_plan(x, y, config.k, ch, config.delta, config.family, config.budget, rng)
    N = config.N or plan.N
    gen = np.random.default_rng(sample_seed)
    simulate = N <= config.max_simulated
    verdicts = []
    for source, expected in ((x, plan.e_x), (y, plan.e_y)):
        if simulate:
            hits = statistic_hits(source, plan.chosen, ch, N, gen)
        else:
            # the count of N independent indicators is Binomial(N, E) exactly
            hits = int(gen.binomial(N, float(expected)))
        verdicts.append(decide_value(hits / N, plan))
    sampler = "traces" if simulate else "binomial"
    return TrialRecord(trial, to_str(x), to_str(y), plan.mode, plan.t0, plan.gap, N, *verdicts, sampler)


def _run_trial_args(args):
    return run_trial(*args)


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Monte Carlo error rate; a trial errs if either direction is misjudged."""
    start = time.perf_counter()
    jobs = [(config, t) for t in range(config.trials)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_run_trial_args, jobs))
    else:
        records = [run_trial(*job) for job in jobs]
    errors = sum(r.error for r in records)
    gaps = [r.gap for r in records]
    return ExperimentResult(
        trials=config.trials,
        errors=errors,
        error_rate=errors / config.trials,
        measured_gap=float(np.mean(gaps)),
        min_gap=float(min(gaps)),
        median_N=int(np.median([r.N for r in records])),
        wall_time=time.perf_counter() - start,
        config=config,
        records=records,
    )


SWEEP_COLUMNS = ("n", "k", "q", "gap", "N", "error_rate", "seed")


@dataclass
class SweepResult:
    rows: list[dict]
    slopes: dict[int, float]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows)
        return buf.getvalue()


def scaling_sweep(
    ns: Sequence[int],
    ks: Sequence[int],
    qs: Sequence[Prob],
    *,
    delta: float = 0.05,
    trials: int = 20,
    seed: int = 0,
    N: int | None = None,
    family: str = "windows",
    threads: int = 1,
    max_simulated: int = 2_000_000,
) -> SweepResult:
    """One experiment per grid point; slope of log N against log n per k."""
    if not ns or not ks or not qs:
        raise ValueError("empty sweep range")
    rows = []
    for k, q, n in itertools.product(ks, qs, ns):
        cfg = ExperimentConfig(n=n, k=k, q=q, delta=delta, trials=trials, seed=seed, N=N, family=family,
                               max_simulated=max_simulated)
        res = run_experiment(cfg, threads)
        rows.append({
            "n": n,
            "k": k,
            "q": str(q),
            "gap": res.measured_gap,
            "N": res.median_N,
            "error_rate": res.error_rate,
            "seed": seed,
        })
        log.info("n=%d k=%d q=%s gap=%.3g N=%d err=%.3f", n, k, q, res.measured_gap, res.median_N, res.error_rate)
    slopes = {}
    for k in ks:
        pts = [(math.log(r["n"]), math.log(r["N"])) for r in rows if r["k"] == k]
        if len({p[0] for p in pts}) >= 2:
            slopes[k] = float(np.polyfit(*zip(*pts), 1)[0])
    return SweepResult(rows, slopes)
