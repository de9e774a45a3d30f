"""Property suites shared by the ``verify`` subcommand and the test suite."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

import numpy as np

from . import poly
from .bitstr import (
    Bits,
    all_strings,
    edit_ball_membership,
    extend_to_nonperiodic,
    first_diff_index,
    in_runlength_class,
    indicator_vector,
    is_non_periodic,
    sample_from_edit_ball,
    substring,
    to_str,
)
from .channel import ChannelParam, verify_mbs_identity


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures and self.checked > 0

    def fail(self, detail) -> None:
        self.failures.append(detail)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = " ".join(f"{k}={v}" for k, v in self.notes.items())
        return f"{status} {self.name}: {self.checked - len(self.failures)}/{self.checked} {extra}".rstrip()

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "failures": [str(f) for f in self.failures[:20]],
            "notes": {k: (float(v) if isinstance(v, (np.floating,)) else v) for k, v in self.notes.items()},
        }


@dataclass(frozen=True)
class PipelineInstance:
    x: Bits
    y: Bits
    k: int
    t0: int
    w: Bits

    @property
    def u(self):
        return indicator_vector(self.x, self.w)

    @property
    def v(self):
        return indicator_vector(self.y, self.w)


def pipeline_instance(x: Bits, y: Bits, k: int) -> PipelineInstance | None:
    t0 = first_diff_index(x, y)
    if t0 is None or t0 < 12 * k:
        return None
    w = extend_to_nonperiodic(substring(x, t0 - 12 * k + 1, t0 - 1))
    return PipelineInstance(x, y, k, t0, w)


def random_pipeline_instances(count: int, n_range: tuple[int, int], k_values, rng: random.Random,
                              max_tries: int = 200_000) -> list[PipelineInstance]:
    """MAIN-mode pairs: random y, x from its edit ball, first difference at >= 12k."""
    out = []
    for _ in range(max_tries):
        if len(out) == count:
            break
        k = rng.choice(list(k_values))
        lo = max(n_range[0], 12 * k + 1)
        if lo > n_range[1]:
            continue
        n = rng.randint(lo, n_range[1])
        y = tuple(rng.randint(0, 1) for _ in range(n))
        x = sample_from_edit_ball(y, k, rng)
        inst = pipeline_instance(x, y, k)
        if inst is not None:
            out.append(inst)
    if len(out) < count:
        raise RuntimeError(f"only {len(out)} of {count} pipeline instances found")
    return out


def thue_morse_split(m: int) -> tuple[list[int], list[int]]:
    """Split 0..2^m-1 by Thue-Morse parity: equal power sums for exponents < m."""
    a, b = [], []
    for i in range(2 ** m):
        (b if bin(i).count("1") % 2 else a).append(i)
    return a, b


def pte_vectors(n: int, m: int, rng: random.Random) -> tuple[Bits, Bits]:
    """0/1 vectors of length n whose difference polynomial has order exactly m."""
    if m == 0:
        i = rng.randint(1, n)
        u = [0] * n
        u[i - 1] = 1
        return tuple(u), (0,) * n
    a, b = thue_morse_split(m)
    span = 2 ** m - 1
    spacing = rng.randint(1, max(1, (n - 1) // span))
    offset = rng.randint(1, n - spacing * span)
    u, v = [0] * n, [0] * n
    for i in a:
        u[offset + spacing * i - 1] = 1
    for i in b:
        v[offset + spacing * i - 1] = 1
    return tuple(u), tuple(v)


def check_extension(max_p: int = 5) -> CheckReport:
    rep = CheckReport("nonperiodic_extension")
    for p in range(1, max_p + 1):
        for wp in all_strings(2 * p - 1):
            rep.checked += 1
            w = extend_to_nonperiodic(wp)
            if not is_non_periodic(w):
                rep.fail(to_str(wp))
    rep.notes["max_length"] = 2 * max_p - 1
    return rep


def check_indicator_structure(instances: list[PipelineInstance]) -> CheckReport:
    rep = CheckReport("indicator_structure")
    worst = [0, 0]
    for inst in instances:
        rep.checked += 1
        p = len(inst.w) // 2
        u, v = inst.u, inst.v
        if not is_non_periodic(inst.w):
            rep.fail(("w periodic", to_str(inst.w)))
        if not (in_runlength_class(u, p) and in_runlength_class(v, p)):
            rep.fail(("runlength", to_str(inst.x), to_str(inst.y)))
        ok, er = edit_ball_membership(u, v, 5 * inst.k)
        worst = [max(worst[0], er.deletions_needed), max(worst[1], er.insertions_needed)]
        if not ok:
            rep.fail(("distance", to_str(inst.x), to_str(inst.y), er))
        if u[inst.t0 - 12 * inst.k] == v[inst.t0 - 12 * inst.k]:
            rep.fail(("no difference at t0-12k+1", to_str(inst.x), to_str(inst.y)))
    rep.notes["max_del_ins"] = tuple(worst)
    return rep


def check_separating_power(instances: list[PipelineInstance]) -> CheckReport:
    rep = CheckReport("separating_power")
    seen = {}
    for inst in instances:
        rep.checked += 1
        m = poly.find_separating_power(inst.u, inst.v, 12 * inst.k + 1)
        if m is None:
            rep.fail((to_str(inst.x), to_str(inst.y)))
        else:
            seen[m] = seen.get(m, 0) + 1
    rep.notes["m_histogram"] = dict(sorted(seen.items()))
    return rep


def agreement_order(alphas, betas) -> int:
    """Smallest j >= 1 whose power sums differ (sizes assumed equal)."""
    j = 1
    while sum(a ** j for a in alphas) == sum(b ** j for b in betas):
        j += 1
    return j


def random_multiset_pairs(count: int, rng: random.Random, size_max: int = 8, value_max: int = 30):
    """Half plain random pairs, half built around Thue-Morse PTE solutions."""
    out = []
    while len(out) < count:
        if len(out) % 2 == 0:
            s = rng.randint(1, size_max)
            a = [rng.randint(0, value_max) for _ in range(s)]
            b = [rng.randint(0, value_max) for _ in range(s)]
        else:
            m = rng.randint(1, 3)
            ta, tb = thue_morse_split(m)
            scale = rng.randint(1, value_max // (2 ** m - 1))
            shift = rng.randint(0, value_max - scale * (2 ** m - 1))
            a = [shift + scale * t for t in ta]
            b = [shift + scale * t for t in tb]
            common = [rng.randint(0, value_max) for _ in range(rng.randint(0, size_max - len(a)))]
            a, b = a + common, b + common
        if sorted(a) != sorted(b):
            out.append((a, b))
    return out


def check_pte_divisibility(pairs: int = 500, seed: int = 0) -> CheckReport:
    rep = CheckReport("pte_divisibility")
    hist = {}
    for a, b in random_multiset_pairs(pairs, random.Random(seed)):
        rep.checked += 1
        f = poly.IntPolynomial.from_exponents(a, b)
        order = poly.divisibility_order(f)
        expected = agreement_order(a, b)
        hist[order] = hist.get(order, 0) + 1
        if order != expected:
            rep.fail((a, b, order, expected))
        q = poly.deflate(f, order)
        if q(1) == 0 or poly.z_minus_1_power(order) * q != f:
            rep.fail(("deflation", a, b))
    rep.notes["order_histogram"] = dict(sorted(hist.items()))
    return rep


def check_circle_certificates(cases, qs=(0.1, 0.3), n_small: int = 50,
                 precision_bits: int | None = None) -> tuple[CheckReport, CheckReport]:
    """Circle search on (u, v, n) cases; returns the certificate and L1-bound reports.

    Cases with n < ``n_small`` are logged in the notes but never failed.
    """
    rep = CheckReport("circle_certificate")
    l1rep = CheckReport("prop9_quotient_l1")
    small_invalid = []
    valid = 0
    min_avg = None
    for u, v in cases:
        n = len(u)
        for q in qs:
            cert = poly.circle_search(u, v, None, q, precision_bits)
            l1 = poly.coefficient_l1_check(cert.quotient, n, cert.separating_power)
            l1rep.checked += 1
            if not l1.ok:
                l1rep.fail((n, cert.separating_power, l1.l1))
            good = cert.valid and cert.sum_ok and cert.avg_ok and cert.witness_value >= cert.bound and cert.channel_factor <= 2
            if n < n_small:
                if not good:
                    small_invalid.append((n, q, cert.separating_power))
                continue
            rep.checked += 1
            valid += good
            min_avg = cert.avg_over_D if min_avg is None else min(min_avg, cert.avg_over_D)
            if not good:
                rep.fail((n, q, cert.to_json()))
    rep.notes["valid_rate"] = valid / rep.checked if rep.checked else float("nan")
    rep.notes["small_n_invalid"] = len(small_invalid)
    rep.notes["min_point_average"] = float(min_avg) if min_avg is not None else float("nan")
    return rep, l1rep


def circle_cases(rng: random.Random, natural: int = 60, constructed_per_m: int = 8,
                 n_range=(50, 200), m_max: int = 4) -> list[tuple[Bits, Bits]]:
    """Natural pipeline instances (k=1) plus Thue-Morse pairs for every m <= m_max."""
    cases = []
    for inst in random_pipeline_instances(natural, n_range, [1], rng):
        if poly.separation_order(inst.u, inst.v) <= m_max:
            cases.append((inst.u.entries, inst.v.entries))
    for m in range(m_max + 1):
        for _ in range(constructed_per_m):
            cases.append(pte_vectors(rng.randint(*n_range), m, rng))
    return cases


def check_identity(n_max: int = 10, ell_max: int = 3, points: int = 100, q=0.25, seed: int = 0,
                   radius: float = 1.2) -> CheckReport:
    """Multi-bit identity on every x with |x| <= n_max, one random w per length."""
    rep = CheckReport("identity_multibit")
    rng = np.random.default_rng(seed)
    ch = ChannelParam(q)
    conventions = {}
    worst = 0.0
    for ell in range(1, ell_max + 1):
        pts = _disk_points(rng, points, ell, radius)
        for n in range(1, n_max + 1):
            for x in all_strings(n):
                w = tuple(int(b) for b in rng.integers(0, 2, ell))
                res = verify_mbs_identity(x, w, pts, ch, conventions=("zero_indexed",))
                rep.checked += 1
                worst = max(worst, res.residual)
                conventions[res.convention] = conventions.get(res.convention, 0) + 1
                if res.residual > 1e-12:
                    rep.fail((to_str(x), to_str(w), res.residual))
    rep.notes["max_residual"] = worst
    rep.notes["conventions"] = conventions
    return rep


def _disk_points(rng: np.random.Generator, count: int, ell: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random((count, ell)))
    theta = 2 * np.pi * rng.random((count, ell))
    return r * np.exp(1j * theta)


def small_pairs(n: int) -> list[tuple[Bits, Bits]]:
    strings = list(all_strings(n))
    return [(a, b) for a, b in itertools.product(strings, strings) if a != b]
