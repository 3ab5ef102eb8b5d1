"""Base-a expansions and the perturbation family |k*m + j*a^i + s|."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator


@dataclass(frozen=True)
class DigitString:
    base: int
    digits: tuple[int, ...]  # least significant first

    @property
    def value(self) -> int:
        return from_digits(self.digits, self.base)

    def __len__(self) -> int:
        return len(self.digits)


def to_digits(n: int, a: int) -> DigitString:
    if a < 2:
        raise ValueError(f"base must be >= 2, got {a}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return DigitString(a, (0,))
    out = []
    while n:
        n, r = divmod(n, a)
        out.append(r)
    return DigitString(a, tuple(out))


def from_digits(digits: Iterable[int], a: int) -> int:
    value = 0
    for d in reversed(tuple(digits)):
        value = value * a + d
    return value


def num_digits(n: int, a: int) -> int:
    return len(to_digits(n, a))


def single_digit_variants(p: int, a: int) -> list[int]:
    """Every value obtained by changing exactly one base-a digit of p.

    Changing the leading digit to 0 is allowed (the result is shorter).
    Ordered by position (least significant first), then by new digit.
    """
    ds = to_digits(p, a).digits
    out = []
    for t, old in enumerate(ds):
        w = a**t
        for d in range(a):
            if d != old:
                out.append(p + (d - old) * w)
    return out


def digit_change_perturbation(p: int, a: int, v: int) -> Perturbation:
    """Express a single-digit variant v of p as a member (a, i, j, 1, 0) of the family."""
    diff = v - p
    ds = to_digits(p, a).digits
    for t in range(len(ds)):
        w = a**t
        if diff % w == 0 and abs(diff // w) < a and (diff // w) != 0:
            j = diff // w
            if 0 <= ds[t] + j < a:
                return Perturbation(a, t, j, 1, 0)
    raise ValueError(f"{v} is not a single-digit variant of {p} in base {a}")


@dataclass(frozen=True)
class Perturbation:
    a: int
    i: int
    j: int
    k: int
    s: int

    def shift(self) -> int:
        """The additive part j*a^i + s."""
        return self.j * self.a**self.i + self.s

    def value_of(self, m: int) -> int:
        return abs(self.k * m + self.shift())

    def as_dict(self) -> dict[str, int]:
        return {"a": self.a, "i": self.i, "j": self.j, "k": self.k, "s": self.s}


@dataclass(frozen=True)
class PerturbationBox:
    """Parameter ranges 1 <= a,|j|,k <= K, 0 <= i <= i_max, s in S."""

    K: int
    N: int
    S: tuple[int, ...]
    i_max: int

    @classmethod
    def make(cls, K: int, N: int, S: Iterable[int] = (0,), i_max: int | None = None) -> PerturbationBox:
        if K < 2:
            raise ValueError("K must be >= 2")
        if N < 1:
            raise ValueError("N must be >= 1")
        S = tuple(sorted(set(S)))
        if len(S) > K:
            raise ValueError(f"|S| = {len(S)} exceeds K = {K}")
        for s in S:
            if abs(s) > K * N:
                raise ValueError(f"s = {s} outside [-KN, KN]")
        if i_max is None:
            i_max = math.floor(K * math.log(N))
        return cls(K, N, S, i_max)

    def j_values(self) -> list[int]:
        return [*range(-self.K, 0), *range(1, self.K + 1)]

    def size(self) -> int:
        return self.K * (self.i_max + 1) * 2 * self.K * self.K * len(self.S)


def tao_box(K: int, N: int, i_max: int | None = None) -> PerturbationBox:
    """The box without additive shifts (S = {0})."""
    return PerturbationBox.make(K, N, (0,), i_max)


def enumerate_box(box: PerturbationBox) -> Iterator[Perturbation]:
    """All tuples of the box in lexicographic (a, i, j, k, s) order."""
    if not box.S:
        return
    js = box.j_values()
    for a in range(1, box.K + 1):
        for i in range(box.i_max + 1):
            for j in js:
                for k in range(1, box.K + 1):
                    for s in box.S:
                        yield Perturbation(a, i, j, k, s)


def end_append_variants(p: int, a: int, T: int) -> list[int]:
    """p followed by t <= T arbitrary base-a digits."""
    out = set()
    for t in range(1, T + 1):
        w = a**t
        out.update(p * w + r for r in range(w))
    return sorted(out)


def prepend_variants(p: int, a: int, T: int) -> list[int]:
    """p preceded by a block of u <= T digits whose leading digit is nonzero."""
    shift = a ** num_digits(p, a)
    out = set()
    for u in range(1, T + 1):
        out.update(p + d * shift for d in range(a ** (u - 1), a**u))
    return sorted(out)


def append_variants(p: int, a: int, T: int) -> list[int]:
    """Append up to T digits at the end or at the beginning of p.

    A prepend of block d is p + d*a^len(p), i.e. the tuple (a, len(p), d, 1, 0)
    when d <= K.  An end append p*a^t + r is the tuple (a, 0, 1, a^t, r - 1),
    which lies inside a box only when a^t <= K; see :func:`append_perturbation`.
    """
    if a < 2:
        raise ValueError("base must be >= 2")
    if T < 1:
        raise ValueError("T must be >= 1")
    return sorted(set(end_append_variants(p, a, T)) | set(prepend_variants(p, a, T)))


def append_perturbation(p: int, a: int, v: int) -> Perturbation:
    """Write an append variant v of p as a member of the perturbation family."""
    L = num_digits(p, a)
    shift = a**L
    if v > p and (v - p) % shift == 0:
        d = (v - p) // shift
        return Perturbation(a, L, d, 1, 0)
    t = 1
    while p * a**t <= v:
        w = a**t
        r = v - p * w
        if 0 <= r < w:
            return Perturbation(a, 0, 1, w, r - 1)
        t += 1
    raise ValueError(f"{v} is not an append variant of {p} in base {a}")
