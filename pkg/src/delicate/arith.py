"""Exact integer arithmetic: sieving, primality, factorization, orders, CRT."""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

log = logging.getLogger(__name__)

DETERMINISTIC_LIMIT = 1 << 64

# First twelve primes as Miller-Rabin bases: exact for n < 3.18e23, so
# certainly for every n below 2^64.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

PRIME = "prime"
PROBABLE = "probable"
COMPOSITE = "composite"


class ArithError(ValueError):
    """Base class for domain errors raised by this module."""


class NotCoprimeError(ArithError):
    pass


class ZeroModulusError(ArithError):
    pass


class IncompleteFactorizationError(ArithError):
    pass


# ---------------------------------------------------------------- sieving


def small_primes(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


@lru_cache(maxsize=8)
def _prime_list(limit: int) -> tuple[int, ...]:
    return tuple(int(p) for p in small_primes(limit))


@dataclass(frozen=True)
class PrimeSieve:
    """Primality flags for the half-open range [lo, hi)."""

    lo: int
    hi: int
    flags: np.ndarray = field(repr=False)

    def __contains__(self, n: int) -> bool:
        return self.lo <= n < self.hi and bool(self.flags[n - self.lo])

    def primes(self) -> np.ndarray:
        return np.flatnonzero(self.flags).astype(np.int64) + self.lo

    def count(self) -> int:
        return int(np.count_nonzero(self.flags))

    def lookup(self, values: np.ndarray) -> np.ndarray:
        """Vectorised membership test; values outside [lo, hi) are False."""
        values = np.asarray(values, dtype=np.int64)
        inside = (values >= self.lo) & (values < self.hi)
        out = np.zeros(values.shape, dtype=bool)
        out[inside] = self.flags[values[inside] - self.lo]
        return out


def segmented_sieve(lo: int, hi: int) -> PrimeSieve:
    """Sieve of Eratosthenes restricted to [lo, hi)."""
    if hi <= lo:
        raise ValueError(f"empty sieve range: hi={hi} <= lo={lo}")
    if lo < 0:
        raise ValueError("lo must be nonnegative")
    flags = np.ones(hi - lo, dtype=bool)
    for n in range(lo, min(hi, 2)):
        flags[n - lo] = False
    for p in small_primes(math.isqrt(hi - 1)):
        p = int(p)
        start = max(p * p, -(-lo // p) * p)
        if start < hi:
            flags[start - lo :: p] = False
    flags.setflags(write=False)
    return PrimeSieve(lo, hi, flags)


# -------------------------------------------------------------- primality


def _strong_probable_prime(n: int, base: int) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(base, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def jacobi(a: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise ValueError("jacobi symbol needs odd positive n")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def strong_lucas_probable_prime(n: int) -> bool:
    """Strong Lucas test with Selfridge's parameter choice (P=1)."""
    if n % 2 == 0 or math.isqrt(n) ** 2 == n:
        return n == 2
    D = 5
    while True:
        j = jacobi(D, n)
        if j == -1:
            break
        if j == 0 and abs(D) != n:
            return False
        D = -D - 2 if D > 0 else -D + 2
    Q = (1 - D) // 4
    d, s = n + 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1

    def half(x: int) -> int:
        x %= n
        return (x + n) // 2 if x % 2 else x // 2

    U, V, Qk = 1, 1, Q % n
    for bit in bin(d)[3:]:
        U, V = U * V % n, (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if bit == "1":
            U, V = half(U + V), half(D * U + V)
            Qk = Qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * Qk) % n
        if V == 0:
            return True
        Qk = Qk * Qk % n
    return False


def primality(n: int) -> str:
    """Classify n as PRIME, PROBABLE (BPSW-accepted, n >= 2^64) or COMPOSITE."""
    if n < 2:
        return COMPOSITE
    for p in _prime_list(200):
        if n == p:
            return PRIME
        if n % p == 0:
            return COMPOSITE
    if n < 200 * 200:
        return PRIME
    if n < DETERMINISTIC_LIMIT:
        if all(_strong_probable_prime(n, b) for b in _MR_BASES):
            return PRIME
        return COMPOSITE
    if _strong_probable_prime(n, 2) and strong_lucas_probable_prime(n):
        return PROBABLE
    return COMPOSITE


def is_prime(n: int) -> bool:
    return primality(n) != COMPOSITE


# ---------------------------------------------------------- factorization


@dataclass(frozen=True)
class Effort:
    """Work budget for :func:`factorize`.

    The rho stage is seeded from ``n`` unless ``seed`` is given; ``fresh``
    draws seeds from the OS instead (non-reproducible).
    """

    trial_bound: int = 10**6
    rho_steps: int = 10**7
    seed: int | None = None
    fresh: bool = False

    def rng(self, n: int) -> random.Random:
        if self.fresh:
            return random.Random()
        return random.Random(n if self.seed is None else f"{self.seed}:{n}")


DEFAULT_EFFORT = Effort()


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]
    unresolved: tuple[int, ...] = ()
    probable: bool = False

    @property
    def complete(self) -> bool:
        return not self.unresolved

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)

    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]


class _Budget:
    def __init__(self, steps: int):
        self.left = steps

    def spend(self, k: int) -> bool:
        self.left -= k
        return self.left > 0


def _brent(n: int, rng: random.Random, budget: _Budget) -> int | None:
    """Return a nontrivial divisor of odd composite n, or None on budget exhaustion."""
    if n % 2 == 0:
        return 2
    m = 128
    while budget.left > 0:
        y, c = rng.randrange(1, n), rng.randrange(1, n)
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            if not budget.spend(2 * r):
                return None
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
                if not budget.spend(1):
                    return None
        if g != n:
            return g
    return None


@lru_cache(maxsize=8)
def _prime_array(limit: int) -> np.ndarray:
    return small_primes(limit)


def _trial_divisors(m: int, bound: int) -> Iterable[int]:
    """Candidate primes for trial division of m, all of them <= bound."""
    if m < 1 << 63:
        ps = _prime_array(bound)
        ps = ps[: np.searchsorted(ps, math.isqrt(m), side="right")]
        return (int(p) for p in ps[np.int64(m) % ps == 0])
    return iter(_prime_list(bound))


def factorize(n: int, effort: Effort = DEFAULT_EFFORT) -> Factorization:
    """Trial division below ``effort.trial_bound`` then Brent's rho.

    Composite cofactors that survive the rho budget are returned in
    ``unresolved``; the result is then partial, never silently wrong.
    """
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    found: dict[int, int] = {}
    m = n
    for p in _trial_divisors(m, effort.trial_bound):
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    probable = False
    unresolved: list[int] = []
    if m > 1:
        rng = effort.rng(n)
        budget = _Budget(effort.rho_steps)
        stack = [m]
        while stack:
            c = stack.pop()
            status = primality(c)
            if status != COMPOSITE:
                probable |= status == PROBABLE
                found[c] = found.get(c, 0) + 1
                continue
            r = math.isqrt(c)
            if r * r == c:
                stack += [r, r]
                continue
            d = _brent(c, rng, budget)
            if d is None:
                unresolved.append(c)
                continue
            stack += [d, c // d]
    return Factorization(
        n,
        tuple(sorted(found.items())),
        tuple(sorted(unresolved)),
        probable,
    )


def largest_prime_factor(n: int, effort: Effort = DEFAULT_EFFORT) -> int | None:
    """P(n), or None when the factorization could not be completed."""
    if n < 2:
        raise ValueError("largest_prime_factor needs n >= 2")
    f = factorize(n, effort)
    if not f.complete:
        return None
    return f.factors[-1][0]


def _complete_factors(n: int) -> dict[int, int]:
    f = factorize(n)
    if not f.complete:
        raise IncompleteFactorizationError(f"could not factor {n}: cofactors {f.unresolved}")
    return f.as_dict()


def omega(n: int) -> int:
    if n < 1:
        raise ValueError("omega needs n >= 1")
    return len(_complete_factors(n)) if n > 1 else 0


# ------------------------------------------------------------------ orders

_BRUTE_ORDER_LIMIT = 1000

FactorFn = Callable[[int], dict[int, int]]


def multiplicative_order(a: int, d: int, factor: FactorFn | None = None) -> int:
    """Least t >= 1 with a^t = 1 (mod d).

    ``factor`` maps an integer to its {prime: exponent} dict; pass a table
    lookup when computing many orders of small moduli.
    """
    if d == 0:
        raise ZeroModulusError("multiplicative order modulo 0 is undefined")
    if d < 0:
        raise ValueError("modulus must be positive")
    if d == 1:
        return 1
    if math.gcd(a, d) != 1:
        raise NotCoprimeError(f"gcd({a}, {d}) = {math.gcd(a, d)} != 1")
    a %= d
    if d < _BRUTE_ORDER_LIMIT:
        t, x = 1, a
        while x != 1:
            x = x * a % d
            t += 1
        return t
    factor = factor or _complete_factors
    # Carmichael exponent lambda(d) and its factorization
    lam = 1
    lam_factors: dict[int, int] = {}
    for p, e in factor(d).items():
        part = {p: e - 1} if e > 1 else {}
        if p == 2 and e >= 3:
            part = {2: e - 2}
        elif p != 2:
            for r, f in factor(p - 1).items() if p > 2 else ():
                part[r] = part.get(r, 0) + f
        for r, f in part.items():
            lam_factors[r] = max(lam_factors.get(r, 0), f)
    for r, f in lam_factors.items():
        lam *= r**f
    t = lam
    for r in lam_factors:
        while t % r == 0 and pow(a, t // r, d) == 1:
            t //= r
    return t


def has_order(a: int, q: int, p: int) -> bool:
    """True iff a has multiplicative order exactly p modulo q, for prime p."""
    return pow(a, p, q) == 1 % q and a % q != 1


# -------------------------------------------------------------------- CRT


class CRTError(ArithError):
    pass


def crt_combine(congruences: Iterable[tuple[int, int]]) -> tuple[int, int]:
    """Solve x = r_i (mod m_i) for pairwise coprime m_i; returns (x, prod m_i)."""
    congruences = list(congruences)
    for idx, (_, m1) in enumerate(congruences):
        if m1 < 1:
            raise CRTError(f"modulus {m1} is not positive")
        for _, m2 in congruences[idx + 1 :]:
            if math.gcd(m1, m2) != 1:
                raise CRTError(f"moduli {m1} and {m2} are not coprime")
    x, mod = 0, 1
    for r, m in congruences:
        # x + mod*t = r (mod m)
        t = (r - x) * pow(mod, -1, m) % m if m > 1 else 0
        x += mod * t
        mod *= m
    return x % mod, mod


class SmallestFactorTable:
    """Smallest-prime-factor table for fast factoring of n <= limit."""

    def __init__(self, limit: int):
        spf = np.zeros(limit + 1, dtype=np.int64)
        for p in small_primes(limit):
            p = int(p)
            block = spf[p :: p]
            block[block == 0] = p
        self.limit = limit
        self._spf = spf

    def factor(self, n: int) -> dict[int, int]:
        if n > self.limit:
            return _complete_factors(n)
        out: dict[int, int] = {}
        while n > 1:
            p = int(self._spf[n])
            out[p] = out.get(p, 0) + 1
            n //= p
        return out
