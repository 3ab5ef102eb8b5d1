"""Desk-scale numerical checks of the analytic estimates.

Series are accumulated in fixed point (integers scaled by ``SCALE``) so
sums are exact integers independent of how the range is split across
workers; values are converted to Decimal at the end.
"""

from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import arith
from .arith import SmallestFactorTable, multiplicative_order, segmented_sieve, small_primes

EULER_GAMMA = 0.5772156649015329
SCALE_DIGITS = 60
SCALE = 10**SCALE_DIGITS


# ---------------------------------------------------------- Romanoff series


@dataclass(frozen=True)
class SeriesEstimate:
    description: str
    X: int
    partial_sum: Decimal
    last_block_increment: Decimal  # sum over (X/2, X]


def _romanoff_block(args: tuple[int, int, int, int]) -> tuple[int, int]:
    """Fixed-point sums over [lo, hi]: (whole block, part with n > half)."""
    A, S, lo, hi, half = args
    table = SmallestFactorTable(hi)
    total = tail = 0
    for n in range(lo, hi + 1):
        if math.gcd(n, A) != 1:
            continue
        fac = table.factor(n) if n > 1 else {}
        ell = multiplicative_order(A, n, table.factor) if n > 1 else 1
        term = S ** len(fac) * SCALE // (n * ell)
        total += term
        if n > half:
            tail += term
    return total, tail


def _to_decimal(fixed: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = SCALE_DIGITS + 20
        return Decimal(fixed) / Decimal(SCALE)


def romanoff_partial_sum(A: int, S: int, X: int, threads: int = 1) -> SeriesEstimate:
    """Sum of S^omega(n) / (n * ord_A(n)) over n <= X with gcd(n, A) = 1.

    Uses ord_A(1) = 1 and omega(1) = 0, so the n = 1 term is 1.
    """
    if A < 2 or S < 1 or X < 2:
        raise ValueError("need A >= 2, S >= 1, X >= 2")
    half = X // 2
    parts = max(1, threads)
    step = -(-X // parts)
    jobs = [(A, S, lo, min(lo + step - 1, X), half) for lo in range(1, X + 1, step)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_romanoff_block, jobs))
    else:
        results = [_romanoff_block(j) for j in jobs]
    total = sum(r[0] for r in results)
    tail = sum(r[1] for r in results)
    return SeriesEstimate(f"romanoff(A={A}, S={S})", X, _to_decimal(total), _to_decimal(tail))


# ------------------------------------------------------------------ Mertens


def mertens_product(x: int) -> tuple[float, float]:
    """(prod over p <= x of (1 - 1/p)^-1, e^gamma * ln x)."""
    if x < 2:
        raise ValueError("x must be >= 2")
    prod = 1.0
    for p in small_primes(x):
        p = float(p)
        prod *= p / (p - 1.0)
    return prod, math.exp(EULER_GAMMA) * math.log(x)


def mertens_product_exact(x: int) -> Fraction:
    out = Fraction(1)
    for p in small_primes(x):
        out *= Fraction(int(p), int(p) - 1)
    return out


# ---------------------------------------------------- exact identities


def square_identity_check(p: int) -> tuple[Fraction, Fraction]:
    """Both sides of (1 - 1/p)^-2 = (1 + 2/p)(1 + (3p - 2)/(p^3 - 3p + 2))."""
    if p < 2:
        raise ValueError("p must be >= 2")
    lhs = 1 / (1 - Fraction(1, p)) ** 2
    rhs = (1 + Fraction(2, p)) * (1 + Fraction(3 * p - 2, p**3 - 3 * p + 2))
    return lhs, rhs


@dataclass(frozen=True)
class SmoothSum:
    y: int
    enumerated: Fraction | None
    product: Fraction
    mertens_square: Fraction

    @property
    def equal(self) -> bool:
        return self.enumerated == self.product


def smooth_squarefree_sum(y: int, enumerate_limit: int = 30, Z: int | None = None) -> SmoothSum:
    """Sum of 2^omega(d)/d over squarefree y-smooth d, against prod(1 + 2/p).

    The enumerated side is only computed for y <= enumerate_limit.  With Z
    given, the enumeration keeps only d <= Z.
    """
    if y < 2:
        raise ValueError("y must be >= 2")
    primes = [int(p) for p in small_primes(y)]
    product = Fraction(1)
    for p in primes:
        product *= 1 + Fraction(2, p)
    enumerated = None
    if y <= enumerate_limit:
        enumerated = Fraction(0)
        for r in range(len(primes) + 1):
            for combo in itertools.combinations(primes, r):
                d = math.prod(combo)
                if Z is None or d <= Z:
                    enumerated += Fraction(2**r, d)
    return SmoothSum(y, enumerated, product, mertens_product_exact(y) ** 2)


def smooth_product_vs_mertens(y: int) -> tuple[float, float]:
    """(ln prod_{p<=y}(1 + 2/p), 2 ln prod_{p<=y}(1 - 1/p)^-1) for large y."""
    ps = small_primes(y).astype(float)
    lhs = math.fsum(np.log1p(2.0 / ps))
    rhs = 2 * math.fsum(-np.log1p(-1.0 / ps))
    return lhs, rhs


# ---------------------------------------------------- truncation tail


@dataclass(frozen=True)
class TailSample:
    v: int
    large_factors: tuple[int, ...]
    product: Fraction
    factor_bound: float  # exp(2 * #large / y)
    log_bound: float  # exp(2 ln v / (y ln y))

    @property
    def ok(self) -> bool:
        return float(self.product) <= self.factor_bound * (1 + 1e-12) and self.factor_bound <= self.log_bound * (1 + 1e-12)


@dataclass(frozen=True)
class TailReport:
    y: int
    Z: int
    samples: tuple[TailSample, ...]
    unresolved: int

    @property
    def max_product(self) -> float:
        return max((float(s.product) for s in self.samples), default=1.0)

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.samples)


def tail_sample(v: int, y: int, effort: arith.Effort = arith.DEFAULT_EFFORT) -> TailSample | None:
    f = arith.factorize(v, effort)
    if not f.complete:
        return None
    large = tuple(p for p in f.primes() if p > y)
    prod = Fraction(1)
    for p in large:
        prod *= 1 + Fraction(2, p)
    return TailSample(
        v, large, prod, math.exp(2 * len(large) / y), math.exp(2 * math.log(v) / (y * math.log(y)))
    )


def value_bound(K: int, N: int) -> int:
    """Z = K * K^floor(K ln N) + K N, an upper bound for |j a^i + s| in the box."""
    return K * K ** math.floor(K * math.log(N)) + K * N


def truncation_tail_bound(
    y: int,
    n_sample: int = 100,
    K: int = 3,
    N: int = 10**6,
    Z: int | None = None,
    seed: int = 0,
    values: Sequence[int] | None = None,
    effort: arith.Effort = arith.Effort(trial_bound=10**5, rho_steps=10**5),
) -> TailReport:
    """Check prod_{p | v, p > y}(1 + 2/p) <= exp(2 ln v / (y ln y)) on sample values.

    Samples are v = |j a^i + s| with parameters drawn from the (K, N) box,
    or the explicit ``values``.  Values whose factorization does not finish
    within ``effort`` are counted as unresolved and skipped.
    """
    if y < 3:
        raise ValueError("y must be >= 3")
    Z = value_bound(K, N) if Z is None else Z
    if values is None:
        rng = random.Random(seed)
        i_max = math.floor(K * math.log(N))
        values = []
        while len(values) < n_sample:
            a = rng.randint(2, K)
            i = rng.randint(0, i_max)
            j = rng.choice([*range(-K, 0), *range(1, K + 1)])
            s = rng.randint(-K * N, K * N)
            v = abs(j * a**i + s)
            if 2 <= v <= Z:
                values.append(v)
    samples, unresolved = [], 0
    for v in values:
        smp = tail_sample(v, y, effort)
        if smp is None:
            unresolved += 1
        else:
            samples.append(smp)
    return TailReport(y, Z, tuple(samples), unresolved)


# ------------------------------------------------ residue class of i


class NoSolution(ValueError):
    pass


@dataclass(frozen=True)
class ResidueClass:
    d: int
    B: int  # gcd(d, j a)
    modulus: int  # ord_a(d / B)
    residue: int  # every solution i >= 1 has i = residue (mod modulus)


def _squarefree(d: int) -> bool:
    return all(e == 1 for e in arith.factorize(d).as_dict().values())


def residue_class_of_i(d: int, a: int, j: int, s: int) -> ResidueClass:
    """Exponents i >= 1 with d | j a^i + s, for squarefree d.

    With B = gcd(d, j a), solutions need gcd(d, s) = B and then
    (j a / B) a^(i-1) = -s / B (mod d / B), which pins i to one class
    modulo ord_a(d / B).
    """
    if d < 1 or not _squarefree(d):
        raise ValueError(f"{d} is not a squarefree positive integer")
    B = math.gcd(d, j * a)
    if math.gcd(d, s) != B:
        raise NoSolution(f"gcd(d, s) = {math.gcd(d, s)} != gcd(d, ja) = {B}")
    dd = d // B
    ell = multiplicative_order(a, dd)
    target = (-(s // B)) * pow((j * a) // B, -1, dd) % dd if dd > 1 else 0
    x = 1 % dd
    for e in range(ell):
        if x == target:
            return ResidueClass(d, B, ell, (e + 1) % ell if ell > 1 else 0)
        x = x * a % dd
    raise NoSolution(f"{target} is not a power of {a} modulo {dd}")


def scan_solutions(d: int, a: int, j: int, s: int, upto: int) -> list[int]:
    """Brute force: all 1 <= i <= upto with d | j a^i + s."""
    out = []
    x = a % d
    for i in range(1, upto + 1):
        if (j * x + s) % d == 0:
            out.append(i)
        x = x * a % d
    return out


# ------------------------------------------------ sieve ratio


@dataclass(frozen=True)
class SieveRatioPoint:
    x: int
    W: int
    b: int
    k: int
    h: int
    count: int
    normalized: float
    product_factor: float

    @property
    def ratio(self) -> float:
        return self.normalized / self.product_factor

    def row(self) -> tuple:
        return (self.x, self.W, self.b, self.k, self.h, self.count, self.normalized, self.product_factor, self.ratio)


SIEVE_RATIO_HEADER = ("x", "W", "b", "k", "h", "count", "normalized", "product_factor", "ratio")


def _prime_divisors(n: int) -> list[int]:
    return arith.factorize(abs(n)).primes() if abs(n) > 1 else []


def product_factor(W: int, h: int) -> float:
    """prod_{p | W}(1 - 1/p)^-2 * prod_{p | h, p not dividing W}(1 - 1/p)^-1."""
    pw = _prime_divisors(W)
    out = Fraction(1)
    for p in pw:
        out *= Fraction(p, p - 1) ** 2
    for p in _prime_divisors(h):
        if p not in pw:
            out *= Fraction(p, p - 1)
    return float(out)


def paired_prime_count(x: int, W: int, b: int, k: int, h: int) -> int:
    """#{m <= x prime : m = b (mod W), |k m + h| prime}, by exact double sieving."""
    primes = segmented_sieve(0, x + 1).primes()
    if W > 1:
        primes = primes[primes % W == b % W]
    if len(primes) == 0:
        return 0
    vals = np.abs(k * primes + h)
    top = int(vals.max())
    return int(np.count_nonzero(segmented_sieve(0, top + 1).lookup(vals)))


def _ratio_point(args) -> SieveRatioPoint:
    x, W, b, k, h = args
    c = paired_prime_count(x, W, b, k, h)
    norm = c * W * math.log(x) ** 2 / x
    return SieveRatioPoint(x, W, b, k, h, c, norm, product_factor(W, h))


def sieve_ratio_experiment(
    x_grid: Sequence[int], W: int, b: int, k: int, h: int, threads: int = 1
) -> list[SieveRatioPoint]:
    if math.gcd(b, W) != 1:
        raise ValueError(f"{b} mod {W} is not a coprime class")
    if k == 0 or h == 0:
        raise ValueError("k and h must be nonzero")
    jobs = [(x, W, b, k, h) for x in x_grid]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_ratio_point, jobs))
    return [_ratio_point(j) for j in jobs]
