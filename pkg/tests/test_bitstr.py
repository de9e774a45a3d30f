import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracedist.bitstr import (
    all_strings,
    as_bits,
    edit_ball_membership,
    extend_to_nonperiodic,
    first_diff_index,
    has_period,
    in_runlength_class,
    indicator_vector,
    is_non_periodic,
    lcs_length,
    sample_from_edit_ball,
    to_str,
)

bitstrings = st.lists(st.integers(0, 1), min_size=1, max_size=40).map(tuple)


def brute_lcs(a, b):
    """Longest common subsequence by trying every subsequence of the shorter string."""
    a, b = as_bits(a), as_bits(b)
    if len(a) > len(b):
        a, b = b, a
    for size in range(len(a), -1, -1):
        for idx in itertools.combinations(range(len(a)), size):
            sub = [a[i] for i in idx]
            it = iter(b)
            if all(any(c == d for d in it) for c in sub):
                return size
    return 0


@pytest.mark.parametrize(
    "x, y, k, expected, dels, ins",
    [
        ("0101", "0101", 0, True, 0, 0),
        ("0101", "0110", 1, True, 1, 1),
        ("0000", "1111", 3, False, 4, 4),
    ],
)
def test_edit_ball_examples(x, y, k, expected, dels, ins):
    ok, rep = edit_ball_membership(x, y, k)
    assert ok is expected
    assert (rep.deletions_needed, rep.insertions_needed) == (dels, ins)


def test_lcs_example_length():
    assert edit_ball_membership("0101", "0110", 1)[1].lcs_length == 3


def test_lcs_matches_brute_force():
    rng = random.Random(4)
    for _ in range(300):
        a = tuple(rng.randint(0, 1) for _ in range(rng.randint(0, 8)))
        b = tuple(rng.randint(0, 1) for _ in range(rng.randint(0, 8)))
        assert lcs_length(a, b) == brute_lcs(a, b)


@given(bitstrings, st.data())
def test_membership_symmetric_for_equal_lengths(x, data):
    y = data.draw(st.lists(st.integers(0, 1), min_size=len(x), max_size=len(x)).map(tuple))
    _, r1 = edit_ball_membership(x, y, 0)
    _, r2 = edit_ball_membership(y, x, 0)
    assert r1.deletions_needed == r1.insertions_needed == r2.deletions_needed


@pytest.mark.parametrize("x, y, t0", [("0011", "0010", 4), ("10", "00", 1), ("11", "11", None)])
def test_first_diff_index(x, y, t0):
    assert first_diff_index(x, y) == t0


def test_first_diff_index_length_mismatch():
    with pytest.raises(ValueError):
        first_diff_index("01", "011")


@pytest.mark.parametrize("w, a, expected", [("0101", 2, True), ("0110", 1, False), ("0000", 1, True)])
def test_has_period(w, a, expected):
    assert has_period(w, a) is expected


@pytest.mark.parametrize("a", [0, 5])
def test_has_period_range(a):
    with pytest.raises(ValueError):
        has_period("0101", a)


@given(bitstrings)
def test_full_period_is_vacuous(w):
    assert has_period(w, len(w))


@given(bitstrings, st.data())
def test_period_survives_prefix_restriction(w, data):
    a = data.draw(st.integers(1, len(w)))
    cut = data.draw(st.integers(a, len(w)))
    if has_period(w, a):
        assert has_period(w[:cut], a)


@pytest.mark.parametrize(
    "w, expected",
    [("0001", True), ("1", True), ("10", True), ("11", True), ("010101", False), ("011011", True), ("0000", False)],
)
def test_is_non_periodic(w, expected):
    assert is_non_periodic(w) is expected


def test_period_equal_to_half_length_is_allowed():
    # only periods below ceil(l/2) count, so an alternating 4-bit string passes
    assert has_period("0101", 2)
    assert is_non_periodic("0101")


@pytest.mark.parametrize("wp, expected", [("000", "0001"), ("011", "0110"), ("1", "10")])
def test_extend_to_nonperiodic_examples(wp, expected):
    assert to_str(extend_to_nonperiodic(wp)) == expected


def test_extend_rejects_even_length():
    with pytest.raises(ValueError):
        extend_to_nonperiodic("01")


@pytest.mark.parametrize("length", [1, 3, 5, 7, 9, 11, 13])
def test_extension_always_nonperiodic(length):
    for wp in all_strings(length):
        w = extend_to_nonperiodic(wp)
        assert w[:-1] == wp
        assert is_non_periodic(w)


@pytest.mark.parametrize(
    "v, p, expected",
    [((1, 0, 0, 1, 0), 3, True), ((1, 0, 0, 1, 0), 4, False), ((0, 0, 0, 0, 0), 10, True)],
)
def test_runlength_class(v, p, expected):
    assert in_runlength_class(v, p) is expected


@pytest.mark.parametrize(
    "x, w, expected",
    [("0110110", "011", "1001000"), ("1111", "11", "1110"), ("0000", "11", "0000")],
)
def test_indicator_vector(x, w, expected):
    iv = indicator_vector(x, w)
    assert str(iv) == expected
    assert iv.pattern_length == len(w)


def test_indicator_vector_rejects_long_pattern():
    with pytest.raises(ValueError):
        indicator_vector("01", "011")


@given(bitstrings, st.integers(1, 6))
def test_indicator_trailing_zeros(x, ell):
    if ell <= len(x):
        iv = indicator_vector(x, x[:ell])
        assert all(b == 0 for b in iv.entries[len(x) - ell + 1:])
        assert iv[0] == 1


@settings(max_examples=300)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=60).map(tuple), st.integers(1, 4), st.data())
def test_nonperiodic_pattern_gives_runlength_class(x, p, data):
    wp = data.draw(st.lists(st.integers(0, 1), min_size=2 * p - 1, max_size=2 * p - 1).map(tuple))
    w = extend_to_nonperiodic(wp)
    if len(w) <= len(x):
        assert in_runlength_class(indicator_vector(x, w), p)


def test_nonperiodic_runlength_exhaustive_small():
    for p in (1, 2, 3):
        words = [w for w in all_strings(2 * p) if is_non_periodic(w)]
        for x in all_strings(10):
            for w in words:
                assert in_runlength_class(indicator_vector(x, w), p)


@settings(max_examples=200)
@given(st.lists(st.integers(0, 1), min_size=8, max_size=60).map(tuple), st.integers(1, 3), st.integers(0, 2**32))
def test_indicator_distance_at_most_5k(y, k, seed):
    rng = random.Random(seed)
    x = sample_from_edit_ball(y, k, rng)
    w = extend_to_nonperiodic(tuple(rng.randint(0, 1) for _ in range(5)))
    ok, _ = edit_ball_membership(indicator_vector(x, w), indicator_vector(y, w), 5 * k)
    assert ok


def test_sample_from_edit_ball_k0():
    assert sample_from_edit_ball("0110", 0, 3) == as_bits("0110")


@given(st.lists(st.integers(0, 1), min_size=1, max_size=30).map(tuple), st.integers(0, 5), st.integers())
def test_sample_from_edit_ball_contract(y, k, seed):
    k = min(k, len(y))
    x = sample_from_edit_ball(y, k, seed)
    assert len(x) == len(y)
    assert edit_ball_membership(x, y, k)[0]
    assert sample_from_edit_ball(y, k, seed) == x


def test_sample_from_edit_ball_unequal_lengths():
    rng = random.Random(0)
    lengths = set()
    for _ in range(100):
        x = sample_from_edit_ball("0101101", 2, rng, equal_length=False)
        lengths.add(len(x))
        assert edit_ball_membership(x, "0101101", 2)[0]
    assert len(lengths) > 1
