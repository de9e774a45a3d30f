"""Power sums, PTE divisibility and the small-circle lower-bound search.

Difference polynomials have exact integer coefficients and are handled with
Python ints throughout. Numerical evaluation goes through mpmath at an
explicit working precision so that tiny lower bounds (of order n^{-2m})
can be compared honestly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from .bitstr import BitsLike, as_bits, indicator_vector

MAX_PRECISION_BITS = 8192


class PrecisionError(ArithmeticError):
    """A comparison could not be decided at the available precision."""


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial, ``coefficients[i]`` multiplies ``z**i``."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        c = list(int(a) for a in self.coefficients)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coefficients", tuple(c))

    @classmethod
    def from_vector(cls, v: BitsLike) -> "IntPolynomial":
        """sum_i v_i z^i with 1-indexed exponents."""
        return cls((0,) + as_bits(v))

    @classmethod
    def difference(cls, u: BitsLike, v: BitsLike) -> "IntPolynomial":
        u, v = as_bits(u), as_bits(v)
        if len(u) != len(v):
            raise ValueError("length mismatch")
        return cls((0,) + tuple(a - b for a, b in zip(u, v)))

    @classmethod
    def from_exponents(cls, alphas: Sequence[int], betas: Sequence[int] = ()) -> "IntPolynomial":
        top = max(list(alphas) + list(betas) + [0])
        c = [0] * (top + 1)
        for a in alphas:
            c[a] += 1
        for b in betas:
            c[b] -= 1
        return cls(tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def __call__(self, z):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        if self.is_zero() or other.is_zero():
            return IntPolynomial(())
        out = [0] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            if a:
                for j, b in enumerate(other.coefficients):
                    out[i + j] += a * b
        return IntPolynomial(tuple(out))

    def l1(self) -> int:
        return sum(abs(c) for c in self.coefficients)


def power_sum(v: BitsLike, m: int) -> int:
    return sum(i ** m for i, b in enumerate(as_bits(v), start=1) if b)


def prefix_power_sum(v: BitsLike, m: int) -> int:
    total = 0
    running = 0
    for i, b in enumerate(as_bits(v), start=1):
        running += i ** m
        if b:
            total += running
    return total


def find_separating_power(u: BitsLike, v: BitsLike, m_max: int) -> int | None:
    """Smallest m in 1..m_max with differing power sums."""
    u, v = as_bits(u), as_bits(v)
    if len(u) != len(v):
        raise ValueError(f"length mismatch: {len(u)} != {len(v)}")
    for m in range(1, m_max + 1):
        if power_sum(u, m) != power_sum(v, m):
            return m
    return None


def separation_order(u: BitsLike, v: BitsLike, m_cap: int | None = None) -> int | None:
    """Smallest m >= 0 with differing power sums; None when none exists up to the cap."""
    u, v = as_bits(u), as_bits(v)
    if len(u) != len(v):
        raise ValueError(f"length mismatch: {len(u)} != {len(v)}")
    if u == v:
        return None
    cap = len(u) if m_cap is None else m_cap
    for m in range(cap + 1):
        if power_sum(u, m) != power_sum(v, m):
            return m
    return None


def _divide_by_z_minus_1(coeffs: Sequence[int]) -> tuple[list[int], int]:
    """Synthetic division by (z - 1): quotient coefficients and remainder f(1)."""
    n = len(coeffs) - 1
    quot = [0] * n
    acc = 0
    for i in range(n, 0, -1):
        acc += coeffs[i]
        quot[i - 1] = acc
    return quot, acc + coeffs[0]


def divisibility_order(f: IntPolynomial, order_cap: int | None = None) -> int:
    """Largest m (at most ``order_cap``) with (z - 1)^m dividing ``f``."""
    if f.is_zero():
        raise ValueError("zero polynomial is divisible to every order")
    cap = f.degree if order_cap is None else order_cap
    coeffs = list(f.coefficients)
    m = 0
    while m < cap:
        quot, rem = _divide_by_z_minus_1(coeffs)
        if rem != 0:
            break
        coeffs = quot
        m += 1
    return m


def deflate(f: IntPolynomial, m: int) -> IntPolynomial:
    """Exact quotient f / (z - 1)^m."""
    coeffs = list(f.coefficients)
    for step in range(m):
        if not coeffs:
            raise ValueError("cannot deflate the zero polynomial")
        coeffs, rem = _divide_by_z_minus_1(coeffs)
        if rem != 0:
            raise ValueError(f"(z-1)^{step + 1} does not divide f")
    return IntPolynomial(tuple(coeffs))


def z_minus_1_power(m: int) -> IntPolynomial:
    return IntPolynomial(tuple(math.comb(m, i) * (-1) ** (m - i) for i in range(m + 1)))


@dataclass(frozen=True)
class L1Check:
    l1: int
    bound: mpmath.mpf
    ok: bool


def coefficient_l1_check(q: IntPolynomial, n: int, m: int, precision_bits: int = 128) -> L1Check:
    """Compare sum |c_i| with (n+1)(en/m)^m; the factor (en/m)^m is 1 at m = 0."""
    with mpmath.workprec(precision_bits):
        bound = mpmath.mpf(n + 1)
        if m > 0:
            bound *= (mpmath.e * n / m) ** m
        l1 = q.l1()
        return L1Check(l1, +bound, l1 <= bound)


def eval_f(f: IntPolynomial, z, precision_bits: int = 64) -> tuple[mpmath.mpc, mpmath.mpf]:
    """Horner evaluation in mpmath, with an a priori rounding-error bound.

    The bound is 4 (deg + 1) 2^(1-p) sum |c_i| |z|^i, a safe margin over the
    textbook Horner constant for complex arithmetic.
    """
    if precision_bits < 64:
        raise ValueError("precision_bits must be at least 64")
    with mpmath.workprec(precision_bits):
        z = mpmath.mpc(z)
        acc = mpmath.mpc(0)
        mag = mpmath.mpf(0)
        az = abs(z)
        for c in reversed(f.coefficients):
            acc = acc * z + c
            mag = mag * az + abs(c)
        err = 4 * (f.degree + 1) * mpmath.ldexp(mag, 1 - precision_bits)
        return +acc, +err


def default_precision(n: int, m: int) -> int:
    return max(64, math.ceil((2 * m + 2) * math.log2(max(n, 2))) + 32)


@dataclass(frozen=True)
class EvalPoint:
    z: mpmath.mpc
    abs_f: mpmath.mpf
    abs_q: mpmath.mpf
    channel_factor: mpmath.mpf

    @property
    def channel_ok(self) -> bool:
        return self.channel_factor <= 2


@dataclass
class Certificate:
    separating_power: int
    divisibility_order: int
    quotient: IntPolynomial
    witness_z: mpmath.mpc
    witness_value: mpmath.mpf
    bound: mpmath.mpf
    channel_factor: mpmath.mpf
    valid: bool
    point_sum: mpmath.mpf
    n: int
    precision_bits: int
    exact_comparison: bool
    points: list[EvalPoint] = field(default_factory=list, repr=False)

    @property
    def D(self) -> int:
        return 2 * self.separating_power + 2

    @property
    def avg_over_D(self) -> mpmath.mpf:
        return self.point_sum / self.D

    @property
    def sum_ok(self) -> bool:
        return self.point_sum >= 1

    @property
    def avg_ok(self) -> bool:
        """The stronger reading: the mean of |q| over the D points reaches 1."""
        return self.avg_over_D >= 1

    def to_json(self) -> dict:
        return {
            "m": self.separating_power,
            "order": self.divisibility_order,
            "quotient_l1": self.quotient.l1(),
            "z": {"re": float(self.witness_z.real), "im": float(self.witness_z.imag)},
            "value": mpmath.nstr(self.witness_value, 20),
            "bound": mpmath.nstr(self.bound, 20),
            "channel_factor": float(self.channel_factor),
            "valid": self.valid,
            "avg_over_D": float(self.avg_over_D),
            "point_sum": float(self.point_sum),
            "n": self.n,
            "precision_bits": self.precision_bits,
        }


def _circle_points(n: int, D: int) -> list[tuple[int, int] | None]:
    """Gaussian-integer numerators (a, b) of e^{2 pi i j / D}, j = 1..D, when exact."""
    if D == 2:
        return [(-1, 0), (1, 0)]
    if D == 4:
        return [(0, 1), (-1, 0), (0, -1), (1, 0)]
    return [None] * D


def _exact_abs_ge(coeffs: Sequence[int], a: int, b: int, n: int, D: int) -> bool:
    """Decide |q(1 + (a + ib)/n^2)| >= 1/D exactly for a Gaussian-integer direction."""
    s = n * n
    re, im = s + a, b  # z = (re + i im) / s
    deg = len(coeffs) - 1
    # N = sum c_r (re + i im)^r s^(deg - r), so q(z) = N / s^deg
    nr, ni = 0, 0
    pr, pi = 1, 0
    for r, c in enumerate(coeffs):
        if c:
            w = c * s ** (deg - r)
            nr += w * pr
            ni += w * pi
        pr, pi = pr * re - pi * im, pr * im + pi * re
    return D * D * (nr * nr + ni * ni) >= s ** (2 * deg)


def circle_search(
    u: BitsLike,
    v: BitsLike,
    m: int | None = None,
    ch=0.0,
    precision_bits: int | None = None,
) -> Certificate:
    """Evaluate the difference polynomial on the circle |z - 1| = 1/n^2.

    ``u``, ``v`` are indicator vectors; ``m`` must be the exact separation
    order (computed when omitted). Candidates are z_j = 1 + e^{2 pi i j/D}/n^2
    with D = 2m + 2. The certificate is VALID when the best candidate beats
    1/(n^{2m} D) and its channel factor |(z - q)/(1 - q)|^n is at most 2.
    Precision is doubled until every comparison is decided.
    """
    u, v = as_bits(u), as_bits(v)
    f = IntPolynomial.difference(u, v)
    if f.is_zero():
        raise ValueError("u == v: no separating power")
    order = divisibility_order(f)
    if m is None:
        m = order
    elif m != order:
        raise ValueError(f"m={m} is not the exact separation order {order}")
    n = len(u)
    quotient = deflate(f, m)
    q = float(getattr(ch, "q", ch))
    bits = precision_bits or default_precision(n, m)
    while True:
        try:
            return _search(f, quotient, n, m, q, bits)
        except PrecisionError:
            bits *= 2
            if bits > MAX_PRECISION_BITS:
                raise


def _search(f, quotient, n, m, q, bits) -> Certificate:
    D = 2 * m + 2
    exact_dirs = _circle_points(n, D)
    with mpmath.workprec(bits):
        bound = 1 / (mpmath.mpf(n) ** (2 * m) * D)
        points = []
        qsum = mpmath.mpc(0)
        for j in range(1, D + 1):
            if exact_dirs[j - 1] is not None:
                a, b = exact_dirs[j - 1]
                z = mpmath.mpc(1 + mpmath.mpf(a) / n ** 2, mpmath.mpf(b) / n ** 2)
            else:
                z = 1 + mpmath.expjpi(mpmath.mpf(2 * j) / D) / n ** 2
            fz, ferr = eval_f(f, z, bits)
            qz, qerr = eval_f(quotient, z, bits)
            qsum += qz
            cf = abs((z - q) / (1 - q)) ** n
            points.append((EvalPoint(z, abs(fz), abs(qz), cf), ferr, qerr))
        j_best = max(range(D), key=lambda j: points[j][0].abs_f)
        best, best_err, _ = points[j_best]
        exact = exact_dirs[0] is not None
        if exact:
            a, b = exact_dirs[j_best]
            beats = _exact_abs_ge(quotient.coefficients, a, b, n, D)
        else:
            if abs(best.abs_f - bound) <= best_err:
                raise PrecisionError("witness value indistinguishable from bound")
            beats = best.abs_f >= bound
        sum_err = sum(t[2] for t in points)
        if abs(abs(qsum) - 1) <= sum_err:
            raise PrecisionError("point sum indistinguishable from 1")
        cf_margin = best.channel_factor * n * mpmath.ldexp(1, 4 - bits)
        if abs(best.channel_factor - 2) <= cf_margin:
            raise PrecisionError("channel factor indistinguishable from 2")
        return Certificate(
            separating_power=m,
            divisibility_order=m,
            quotient=quotient,
            witness_z=best.z,
            witness_value=best.abs_f,
            bound=+bound,
            channel_factor=best.channel_factor,
            valid=bool(beats and best.channel_ok),
            point_sum=abs(qsum),
            n=n,
            precision_bits=bits,
            exact_comparison=exact,
            points=[t[0] for t in points],
        )


def certificate_for(x: BitsLike, y: BitsLike, w: BitsLike, ch=0.0, precision_bits=None) -> Certificate:
    return circle_search(indicator_vector(x, w), indicator_vector(y, w), None, ch, precision_bits)


def mbs_polynomial_batch(strings: np.ndarray, w: BitsLike, zs: np.ndarray, first_shift: int = 0) -> np.ndarray:
    """Multi-bit generating polynomial for many strings and points at once.

    Evaluates sum over j_1 < ... < j_l with s_{j_h} = w_h of
    z_1^(j_1 - first_shift) prod_{h>=2} z_h^(j_h - j_{h-1} - 1),
    positions 1-indexed, with 0^0 = 1. ``strings`` is (T, L) of 0/1 and
    ``zs`` is (l, P); the result is (T, P).
    """
    w = as_bits(w)
    strings = np.asarray(strings)
    zs = np.asarray(zs)
    T, L = strings.shape
    ell = len(w)
    P = zs.shape[1]
    dtype = np.result_type(zs.dtype, np.complex128)
    # a[h]: sum over partial embeddings of w_1..w_h ending exactly at the current position
    # s[h]: weighted sum over partial embeddings of w_1..w_h ending strictly before it
    s = np.zeros((ell, T, P), dtype=dtype)
    total = np.zeros((T, P), dtype=dtype)
    z1pow = np.ones(P, dtype=dtype) if first_shift else zs[0].astype(dtype)
    for j in range(L):
        col = strings[:, j]
        new_s = [None] * ell
        for h in range(ell):
            match = (col == w[h])[:, None]
            if h == 0:
                a_h = np.where(match, z1pow[None, :], 0)
            else:
                a_h = np.where(match, s[h - 1], 0)
            if h + 1 < ell:
                # embeddings ending here feed the next letter with gap 0; older ones gain a factor z_{h+2}
                new_s[h] = s[h] * zs[h + 1][None, :] + a_h
            else:
                total += a_h
        for h in range(ell - 1):
            s[h] = new_s[h]
        z1pow = z1pow * zs[0]
    return total


def mbs_polynomial(s: BitsLike, w: BitsLike, z: Sequence[complex], first_shift: int = 0) -> complex:
    arr = np.array([as_bits(s)], dtype=np.int8)
    zs = np.asarray(z, dtype=np.complex128).reshape(-1, 1)
    return complex(mbs_polynomial_batch(arr, w, zs, first_shift)[0, 0])


def embedding_counts(x: BitsLike, w: BitsLike) -> dict[tuple[int, int], int]:
    """(first, last) -> number of embeddings of ``w`` into ``x`` as a subsequence."""
    x, w = as_bits(x), as_bits(w)
    n, ell = len(x), len(w)
    out: dict[tuple[int, int], int] = {}
    for a in range(1, n + 1):
        if x[a - 1] != w[0]:
            continue
        if ell == 1:
            out[(a, a)] = 1
            continue
        # ways[h]: embeddings of w_2..w_{h+1} into x_{a+1..j}
        ways = [1] + [0] * (ell - 1)
        for b in range(a + 1, n + 1):
            bit = x[b - 1]
            if bit == w[-1] and ways[ell - 2]:
                out[(a, b)] = out.get((a, b), 0) + ways[ell - 2]
            for h in range(ell - 2, 0, -1):
                if bit == w[h]:
                    ways[h] += ways[h - 1]
    return out


@dataclass(frozen=True)
class GapResult:
    z1: mpmath.mpc
    z: mpmath.mpf
    gap: mpmath.mpf
    gap_at_zero: mpmath.mpf


def segment_gap_search(
    x: BitsLike,
    y: BitsLike,
    w: BitsLike,
    m: int | None = None,
    ch=0.0,
    grid_size: int = 1024,
    precision_bits: int | None = None,
    certificate: Certificate | None = None,
) -> GapResult:
    """Grid search for the multi-variate gap with z_1 fixed at the circle witness.

    Sets z_2 = ... = z_l = z and scans real z over [max(2q - 1, 0), 1]
    (endpoints included). Reports the measured gap only; no lower bound is
    asserted.
    """
    x, y, w = as_bits(x), as_bits(y), as_bits(w)
    q = float(getattr(ch, "q", ch))
    if certificate is None:
        certificate = circle_search(indicator_vector(x, w), indicator_vector(y, w), m, q, precision_bits)
    z1 = certificate.witness_z
    ell = len(w)
    diff: dict[int, dict[int, int]] = {}
    for sign, s in ((1, x), (-1, y)):
        for (a, b), c in embedding_counts(s, w).items():
            d = b - a - (ell - 1)
            row = diff.setdefault(d, {})
            row[a] = row.get(a, 0) + sign * c
    bits = precision_bits or certificate.precision_bits
    with mpmath.workprec(bits):
        top = max(diff) if diff else 0
        coef = [mpmath.mpc(0)] * (top + 1)
        for d, row in diff.items():
            coef[d] = mpmath.fsum(c * z1 ** a for a, c in row.items() if c)

        def at(z):
            acc = mpmath.mpc(0)
            for c in reversed(coef):
                acc = acc * z + c
            return abs(acc)

        at_zero = abs(coef[0])
        if ell == 1:
            return GapResult(z1, mpmath.mpf(0), at_zero, at_zero)
        lo = mpmath.mpf(max(2 * q - 1, 0.0))
        grid = [lo + (1 - lo) * mpmath.mpf(i) / (grid_size - 1) for i in range(grid_size)] if grid_size > 1 else [mpmath.mpf(1)]
        best_z, best = max(((z, at(z)) for z in grid), key=lambda t: t[1])
        return GapResult(z1, best_z, best, at_zero)
