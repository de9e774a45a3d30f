"""Binary strings: edit balls, periodicity, indicator vectors.

Positions are 1-indexed in every public function (``x[1]`` is the first bit),
while the stored representation is an ordinary 0-indexed tuple of ints.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

Bits = tuple[int, ...]
BitsLike = Union[str, Sequence[int], "IndicatorVector"]


def as_bits(s: BitsLike) -> Bits:
    """Normalize a '0'/'1' string or int sequence to a tuple of ints."""
    if isinstance(s, IndicatorVector):
        return s.entries
    if isinstance(s, str):
        if any(c not in "01" for c in s):
            raise ValueError(f"not a binary string: {s!r}")
        return tuple(1 if c == "1" else 0 for c in s)
    out = tuple(int(b) for b in s)
    if any(b not in (0, 1) for b in out):
        raise ValueError(f"entries must be 0 or 1: {s!r}")
    return out


def to_str(s: BitsLike) -> str:
    return "".join("1" if b else "0" for b in as_bits(s))


@dataclass(frozen=True)
class IndicatorVector:
    """Start positions of the occurrences of a pattern, as a 0/1 vector."""

    entries: Bits
    pattern_length: int

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def ones(self) -> list[int]:
        """1-indexed positions holding a 1."""
        return [i + 1 for i, b in enumerate(self.entries) if b]

    def __str__(self) -> str:
        return to_str(self.entries)


@dataclass(frozen=True)
class EditDistanceReport:
    deletions_needed: int
    insertions_needed: int
    lcs_length: int


def lcs_length(a: BitsLike, b: BitsLike) -> int:
    a, b = as_bits(a), as_bits(b)
    prev = [0] * (len(b) + 1)
    for ai in a:
        cur = [0]
        for j, bj in enumerate(b):
            cur.append(prev[j] + 1 if ai == bj else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def edit_report(x: BitsLike, y: BitsLike) -> EditDistanceReport:
    """Minimal deletions/insertions turning ``y`` into ``x``."""
    x, y = as_bits(x), as_bits(y)
    lcs = lcs_length(x, y)
    return EditDistanceReport(len(y) - lcs, len(x) - lcs, lcs)


def edit_ball_membership(x: BitsLike, y: BitsLike, k: int) -> tuple[bool, EditDistanceReport]:
    """Is ``x`` reachable from ``y`` with at most ``k`` deletions and ``k`` insertions?"""
    if k < 0:
        raise ValueError("k must be nonnegative")
    rep = edit_report(x, y)
    return rep.deletions_needed <= k and rep.insertions_needed <= k, rep


def first_diff_index(x: BitsLike, y: BitsLike) -> int | None:
    x, y = as_bits(x), as_bits(y)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} != {len(y)}")
    for i, (a, b) in enumerate(zip(x, y), start=1):
        if a != b:
            return i
    return None


def has_period(w: BitsLike, a: int) -> bool:
    w = as_bits(w)
    if not 1 <= a <= len(w):
        raise ValueError(f"period {a} out of range 1..{len(w)}")
    return all(w[i] == w[i + a] for i in range(len(w) - a))


def is_non_periodic(w: BitsLike) -> bool:
    # the range [ceil(l/2) - 1] is empty for l <= 2
    w = as_bits(w)
    if not w:
        raise ValueError("empty string")
    top = (len(w) + 1) // 2 - 1
    return not any(has_period(w, a) for a in range(1, top + 1))


def extend_to_nonperiodic(w_prime: BitsLike) -> Bits:
    """Append one bit to an odd-length string so the result is non-periodic.

    Appending 0 is preferred when both choices work.
    """
    w_prime = as_bits(w_prime)
    if len(w_prime) % 2 == 0:
        raise ValueError(f"expected odd length, got {len(w_prime)}")
    for bit in (0, 1):
        cand = w_prime + (bit,)
        if is_non_periodic(cand):
            return cand
    raise AssertionError(f"no non-periodic extension of {to_str(w_prime)}")


def in_runlength_class(v: BitsLike, p: int) -> bool:
    """Consecutive 1 entries at positions i < j always satisfy j - i >= p."""
    ones = [i for i, b in enumerate(as_bits(v)) if b]
    return all(j - i >= p for i, j in zip(ones, ones[1:]))


def indicator_vector(x: BitsLike, w: BitsLike) -> IndicatorVector:
    x, w = as_bits(x), as_bits(w)
    n, l = len(x), len(w)
    if l > n:
        raise ValueError(f"pattern length {l} exceeds string length {n}")
    if l == 0:
        raise ValueError("empty pattern")
    entries = tuple(int(x[i:i + l] == w) for i in range(n - l + 1)) + (0,) * (l - 1)
    return IndicatorVector(entries, l)


def substring(x: BitsLike, start: int, stop: int) -> Bits:
    """1-indexed inclusive slice ``x_{start:stop}``."""
    x = as_bits(x)
    if start < 1 or stop > len(x):
        raise IndexError(f"slice {start}:{stop} outside 1..{len(x)}")
    return x[start - 1:stop]


def sample_from_edit_ball(
    y: BitsLike,
    k: int,
    rng_seed=None,
    *,
    equal_length: bool = True,
) -> Bits:
    """Random ``x`` in the radius-``k`` edit ball around ``y``.

    Draws ``d`` uniformly from ``0..k``, deletes ``d`` uniformly chosen
    positions, then inserts uniformly placed random bits. With
    ``equal_length`` the insertion count equals ``d``; otherwise it is drawn
    independently from ``0..k``.
    """
    y = as_bits(y)
    if not 0 <= k <= len(y):
        raise ValueError(f"k={k} must lie in 0..{len(y)}")
    rng = rng_seed if isinstance(rng_seed, random.Random) else random.Random(rng_seed)
    if k == 0:
        return y
    d = rng.randint(0, k)
    n_ins = d if equal_length else rng.randint(0, k)
    drop = set(rng.sample(range(len(y)), d))
    x = [b for i, b in enumerate(y) if i not in drop]
    for _ in range(n_ins):
        x.insert(rng.randint(0, len(x)), rng.randint(0, 1))
    return tuple(x)


def all_strings(length: int) -> Iterable[Bits]:
    for v in range(1 << length):
        yield tuple((v >> (length - 1 - i)) & 1 for i in range(length))
