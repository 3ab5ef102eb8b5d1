"""Slow reference implementations, deliberately independent of the package."""

from __future__ import annotations

from functools import lru_cache


def trial_is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@lru_cache(maxsize=None)
def _odd_primes_below(limit: int) -> tuple[int, ...]:
    return tuple(q for q in range(3, limit + 1, 2) if trial_is_prime(q))


def fast_trial_is_prime(n: int, limit: int = 1100) -> bool:
    """Trial division by primes, valid for n < limit^2."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for q in _odd_primes_below(limit):
        if q * q > n:
            return True
        if n % q == 0:
            return n == q
    return True


def trial_factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    f = 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def lucas_lehmer(p: int) -> bool:
    """2^p - 1 prime, for odd prime p."""
    m = (1 << p) - 1
    s = 4
    for _ in range(p - 2):
        s = (s * s - 2) % m
    return s == 0


def brute_order(a: int, d: int) -> int:
    if d == 1:
        return 1
    t, x = 1, a % d
    while x != 1:
        x = x * a % d
        t += 1
    return t


def naive_digit_variants(p: int, a: int) -> list[int]:
    s = []
    n = p
    while n:
        s.append(n % a)
        n //= a
    out = []
    for pos in range(len(s)):
        for d in range(a):
            if d == s[pos]:
                continue
            t = list(s)
            t[pos] = d
            out.append(sum(x * a**e for e, x in enumerate(t)))
    return out


def naive_digitally_delicate(p: int, a: int = 10, is_prime=fast_trial_is_prime) -> bool:
    return not any(is_prime(v) for v in naive_digit_variants(p, a))


def naive_delicate_primes(lo: int, hi: int, a: int = 10) -> list[int]:
    return [p for p in range(lo, hi + 1) if fast_trial_is_prime(p) and naive_digitally_delicate(p, a)]
