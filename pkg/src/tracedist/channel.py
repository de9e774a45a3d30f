"""Deletion channel: sampling, exact trace distributions, statistic expectations.

Probabilities are computed in whatever arithmetic ``q`` carries: a
``fractions.Fraction`` keeps every result exact, a float gives floats.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence, Union

import numpy as np

from .bitstr import Bits, BitsLike, as_bits, to_str
from . import poly

Prob = Union[float, Fraction]

ENUMERATION_LIMIT = 20


def parse_q(value: Union[str, float, Fraction]) -> Prob:
    """``"1/5"`` becomes ``Fraction(1, 5)``; decimals stay floats."""
    if isinstance(value, (Fraction, float)):
        return value
    if isinstance(value, int):
        return Fraction(value)
    text = str(value).strip()
    if "/" in text:
        return Fraction(text)
    return float(text)


@dataclass(frozen=True)
class ChannelParam:
    q: Prob

    def __post_init__(self):
        if not 0 <= self.q < 1:
            raise ValueError(f"deletion probability must lie in [0, 1), got {self.q}")

    @property
    def keep(self) -> Prob:
        return 1 - self.q

    @property
    def exact(self) -> bool:
        return isinstance(self.q, Fraction)


def _q(ch) -> Prob:
    return ch.q if isinstance(ch, ChannelParam) else ch


@dataclass(frozen=True)
class Trace:
    bits: Bits
    source_length: int

    def __post_init__(self):
        if len(self.bits) > self.source_length:
            raise ValueError("trace longer than its source")

    def __str__(self) -> str:
        return to_str(self.bits)

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class StatisticSpec:
    """Trace positions ``indices`` (1-indexed) must carry the bits of ``pattern``."""

    pattern: Bits
    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "pattern", as_bits(self.pattern))
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if len(self.pattern) != len(self.indices) or not self.indices:
            raise ValueError("pattern and indices must be nonempty and of equal length")
        if self.indices[0] < 1 or any(a >= b for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError(f"indices must be strictly increasing from 1: {self.indices}")

    @classmethod
    def window(cls, pattern: BitsLike, start: int) -> "StatisticSpec":
        pattern = as_bits(pattern)
        return cls(pattern, tuple(range(start, start + len(pattern))))

    def holds(self, trace: BitsLike) -> bool:
        t = trace.bits if isinstance(trace, Trace) else as_bits(trace)
        if self.indices[-1] > len(t):
            return False
        return all(t[i - 1] == b for i, b in zip(self.indices, self.pattern))

    def to_dict(self) -> dict:
        return {"pattern": to_str(self.pattern), "indices": list(self.indices)}


def transmit(x: BitsLike, ch: ChannelParam, rng_seed=None) -> Trace:
    x = as_bits(x)
    rng = np.random.default_rng(rng_seed)
    kept = rng.random(len(x)) >= float(_q(ch))
    return Trace(tuple(b for b, k in zip(x, kept) if k), len(x))


def sample_traces(x: BitsLike, ch: ChannelParam, count: int, rng_seed=None) -> list[Trace]:
    x = as_bits(x)
    rng = np.random.default_rng(rng_seed)
    kept = rng.random((count, len(x))) >= float(_q(ch))
    return [Trace(tuple(b for b, k in zip(x, row) if k), len(x)) for row in kept]


def exact_trace_distribution(x: BitsLike, ch: ChannelParam) -> dict[str, Prob]:
    """Trace -> probability, summed over all 2^n deletion patterns."""
    x = as_bits(x)
    n = len(x)
    if n > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration limited to length {ENUMERATION_LIMIT}, got {n}")
    return dict(_trace_distribution(x, _q(ch)))


@lru_cache(maxsize=8192)
def _trace_distribution(x: Bits, q: Prob) -> tuple[tuple[str, Prob], ...]:
    n = len(x)
    p = 1 - q
    weight = [q ** d * p ** (n - d) for d in range(n + 1)]
    acc: dict[str, Prob] = defaultdict(int)
    for kept in itertools.product((False, True), repeat=n):
        t = "".join("1" if b else "0" for b, k in zip(x, kept) if k)
        acc[t] += weight[n - len(t)]
    return tuple(acc.items())


def statistic_from_distribution(dist: dict[str, Prob], spec: StatisticSpec) -> Prob:
    return sum((pr for t, pr in dist.items() if spec.holds(t)), 0)


def exact_statistic_expectation(x: BitsLike, spec: StatisticSpec, ch: ChannelParam) -> Prob:
    """P(trace reaches ``indices[-1]`` and carries ``pattern`` at ``indices``).

    Dynamic program over source positions; the state is the number of
    surviving bits so far, with states at the last index absorbed.
    """
    x = as_bits(x)
    q = _q(ch)
    p = 1 - q
    last = spec.indices[-1]
    if last > len(x):
        return 0 * q
    required = dict(zip(spec.indices, spec.pattern))
    # dist[c]: prob. that c bits survived so far and all constraints up to c hold
    dist: list[Prob] = [1 + 0 * q] + [0 * q] * last
    done = 0 * q
    for j, bit in enumerate(x):
        # the c-th kept bit must come from source index >= c
        top = min(j, last - 1)
        new = [0 * q] * (last + 1)
        for c in range(top + 1):
            mass = dist[c]
            if not mass:
                continue
            new[c] += mass * q
            nxt = c + 1
            if required.get(nxt, bit) == bit:
                if nxt == last:
                    done += mass * p
                else:
                    new[nxt] += mass * p
        dist = new
    return done


def position_marginals(x: BitsLike, ch: ChannelParam) -> np.ndarray:
    """``P[i, b]`` = probability that trace bit ``i`` (1-indexed row ``i-1``) equals ``b``."""
    x = np.asarray(as_bits(x), dtype=np.int8)
    a = _kth_kept_matrix(len(x), float(_q(ch)))
    out = np.empty((len(x), 2))
    out[:, 1] = a @ (x == 1)
    out[:, 0] = a @ (x == 0)
    return out


def pair_table(x: BitsLike, ch: ChannelParam) -> np.ndarray:
    """``T[b1, b2, i1-1, i2-1]`` = P(trace_{i1} = b1, trace_{i2} = b2) for i1 < i2.

    Closed form: source bit ``j`` is the ``i``-th survivor with probability
    C(j-1, i-1) p^i q^(j-i), and the gap to the next chosen survivor is an
    independent copy of the same law.
    """
    xs = np.asarray(as_bits(x), dtype=np.int8)
    n = len(xs)
    a = _kth_kept_matrix(n, float(_q(ch)))
    out = np.zeros((2, 2, n, n))
    for b2 in (0, 1):
        hit2 = (xs == b2).astype(float)
        # h[d-1, j1-1] = sum_g a[d-1, g-1] * hit2[j1-1+g]
        h = np.zeros((n, n))
        for g in range(1, n):
            h[:, : n - g] += np.outer(a[:, g - 1], hit2[g:])
        for b1 in (0, 1):
            m = a * (xs == b1)[None, :]
            full = m @ h.T  # full[i1-1, d-1]
            for i1 in range(1, n):
                d = np.arange(1, n - i1 + 1)
                out[b1, b2, i1 - 1, i1 - 1 + d] = full[i1 - 1, d - 1]
    return out


@lru_cache(maxsize=64)
def _kth_kept_matrix(n: int, q: float) -> np.ndarray:
    p = 1.0 - q
    a = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            a[i - 1, j - 1] = comb(j - 1, i - 1) * p ** i * q ** (j - i)
    return a


def empirical_statistic(traces: Sequence[Trace], spec: StatisticSpec) -> float:
    if not traces:
        raise ValueError("no traces")
    return sum(spec.holds(t) for t in traces) / len(traces)


def statistic_hits(
    x: BitsLike, spec: StatisticSpec, ch: ChannelParam, count: int, rng: np.random.Generator,
    chunk: int = 200_000,
) -> int:
    """Number of ``count`` fresh traces of ``x`` satisfying ``spec``.

    Same channel law as ``transmit`` but never materializes the traces.
    """
    xs = np.asarray(as_bits(x), dtype=bool)
    q = float(_q(ch))
    hits = 0
    left = count
    while left > 0:
        size = min(chunk, left)
        left -= size
        kept = rng.random((size, len(xs))) >= q
        rank = np.cumsum(kept, axis=1, dtype=np.int16)
        ok = np.ones(size, dtype=bool)
        for i, b in zip(spec.indices, spec.pattern):
            at = kept & (rank == i)
            present = at.any(axis=1)
            bit = (at & xs).any(axis=1)
            ok &= present & (bit == bool(b))
        hits += int(ok.sum())
    return hits


def trace_lengths(n: int, ch: ChannelParam, count: int, rng_seed=None) -> np.ndarray:
    rng = np.random.default_rng(rng_seed)
    return (rng.random((count, n)) >= float(_q(ch))).sum(axis=1)


# Convention name -> (trace-side first exponent shift, source-side first exponent shift)
CONVENTIONS = {
    "zero_indexed": (1, 1),
    "as_printed": (0, 0),
    "trace_shift_only": (1, 0),
}


@dataclass(frozen=True)
class IdentityCheck:
    residual: float
    convention: str
    residuals: dict[str, float]


def verify_mbs_identity(
    x: BitsLike,
    w: BitsLike,
    points: Sequence[Sequence[complex]] | np.ndarray,
    ch: ChannelParam,
    n_max: int = ENUMERATION_LIMIT,
    conventions: Iterable[str] = tuple(CONVENTIONS),
    dtype=np.complex128,
) -> IdentityCheck:
    """Compare both sides of the multi-bit generating-function identity.

    The expectation side comes from the enumerated trace distribution, the
    polynomial side from :func:`poly.mbs_polynomial`. ``points`` holds one
    row ``(z_1, ..., z_l)`` per evaluation point. Each candidate indexing
    convention is scored by its worst absolute residual; the best one is
    reported.
    """
    x, w = as_bits(x), as_bits(w)
    if len(x) > n_max:
        raise ValueError(f"|x|={len(x)} exceeds guard {n_max}")
    zs = np.asarray(points, dtype=dtype).reshape(-1, len(w)).T  # (l, P)
    q = _q(ch)
    qf, pf = float(q), float(1 - q)
    vs = (zs - qf) / pf
    by_len: dict[int, list[tuple[str, float]]] = defaultdict(list)
    for t, pr in exact_trace_distribution(x, ch).items():
        by_len[len(t)].append((t, float(pr)))
    residuals = {}
    for name in conventions:
        t_shift, s_shift = CONVENTIONS[name]
        lhs = np.zeros(zs.shape[1], dtype=dtype)
        for length, items in by_len.items():
            if length < len(w):
                continue
            strings = np.array([[c == "1" for c in t] for t, _ in items], dtype=np.int8)
            probs = np.array([pr for _, pr in items])
            vals = poly.mbs_polynomial_batch(strings, w, vs, first_shift=t_shift)
            lhs += probs @ vals
        lhs /= pf ** len(w)
        rhs = poly.mbs_polynomial_batch(np.array([x], dtype=np.int8), w, zs, first_shift=s_shift)[0]
        residuals[name] = float(np.max(np.abs(lhs - rhs)))
    best = min(residuals, key=residuals.get)
    return IdentityCheck(residuals[best], best, residuals)


def write_traces(handle, traces: Sequence[Trace], n: int, q, seed) -> None:
    handle.write(f"# n={n} q={q} seed={seed} N={len(traces)}\n")
    for t in traces:
        handle.write(f"{t}\n")


def read_traces(handle) -> tuple[dict, list[Trace]]:
    header = handle.readline()
    if not header.startswith("#"):
        raise ValueError("missing trace-file header")
    meta = dict(tok.split("=", 1) for tok in header[1:].split())
    n = int(meta["n"])
    traces = [Trace(as_bits(line.strip()), n) for line in handle if not line.startswith("#")]
    return meta, traces
