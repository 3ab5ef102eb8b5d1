"""Covering construction: prime sets P_a, moduli q_p, and the residue b mod W.

For each base a the primes p in P_a come with q_p = P(a^p - 1), a prime of
which a has multiplicative order exactly p.  Each P_a is split into cells
indexed by (j, k, s). For p in cell (j, k, s) the residue b is chosen so
that q_p divides k*b + j*a^i + s for every i in a fixed class mod p.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import arith
from .arith import DEFAULT_EFFORT, Effort, crt_combine, factorize, has_order, primality

log = logging.getLogger(__name__)

PROPORTIONAL = "proportional"
STRICT = "strict"
CLASS_NAMES = ("j+s", "ja+s")


class ConstructionError(RuntimeError):
    pass


class InsufficientMassError(ConstructionError):
    pass


class CoverageError(RuntimeError):
    """A claimed divisibility failed: the construction is wrong."""


def as_fraction(x) -> Fraction:
    # str() keeps 0.2 as 1/5 rather than its binary expansion
    return x if isinstance(x, Fraction) else Fraction(str(x))


@dataclass(frozen=True)
class PrimePair:
    a: int
    p: int
    q: int
    certified_maximal: bool = True


@dataclass(frozen=True)
class Choice:
    a: int
    p: int
    q: int
    j: int
    k: int
    s: int
    cls: int  # 0: i = 0 (mod p) covered, 1: i = 1 (mod p) covered
    b_p: int


Cell = tuple[int, int, int]  # (j, k, s_index)


def harmonic_mass(primes: Iterable[int]) -> Fraction:
    return sum((Fraction(1, p) for p in primes), Fraction(0))


def _next_prime(n: int) -> int:
    n += 1
    while primality(n) == arith.COMPOSITE:
        n += 1
    return n


def build_p_sets(
    K: int,
    M,
    effort: Effort = DEFAULT_EFFORT,
    min_prime: int = 5,
    prime_cap: int = 10**4,
) -> dict[int, list[PrimePair]]:
    """Build P_2, ..., P_K by scanning consecutive primes p >= min_prime.

    A candidate p is accepted for base a when q = P(a^p - 1) exceeds K, is
    new, and a has order p modulo q; p itself must also be unused by other
    bases so the union over a stays disjoint.  Scanning stops once the sum
    of 1/p reaches M.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    target = as_fraction(M)
    if target <= 0:
        raise ValueError("M must be positive")
    used_p: set[int] = set()
    used_q: set[int] = set()
    out: dict[int, list[PrimePair]] = {}
    for a in range(2, K + 1):
        pairs: list[PrimePair] = []
        mass = Fraction(0)
        p = min_prime - 1
        while mass < target:
            p = _next_prime(p)
            if p > prime_cap:
                raise ConstructionError(
                    f"a={a}: harmonic mass {float(mass):.6f} < M={float(target)} "
                    f"with primes up to cap {prime_cap}"
                )
            if p in used_p:
                continue
            pair = _candidate(a, p, K, used_q, effort)
            if pair is None:
                continue
            pairs.append(pair)
            used_p.add(p)
            used_q.add(pair.q)
            mass += Fraction(1, p)
        out[a] = pairs
    return out


def _candidate(a: int, p: int, K: int, used_q: set[int], effort: Effort) -> PrimePair | None:
    f = factorize(a**p - 1, effort)
    if f.complete:
        q = f.factors[-1][0]
        if q <= K or q in used_q or not has_order(a, q, p):
            log.debug("a=%d p=%d rejected (q=%d)", a, p, q)
            return None
        return PrimePair(a, p, q, certified_maximal=True)
    log.warning("a=%d p=%d: a^p-1 not fully factored, cofactors %s", a, p, f.unresolved)
    for q in sorted(f.primes(), reverse=True):
        if q > K and q not in used_q and has_order(a, q, p):
            return PrimePair(a, p, q, certified_maximal=False)
    log.warning("a=%d p=%d skipped: no usable proven factor", a, p)
    return None


def cells(K: int, S: Sequence[int]) -> list[Cell]:
    js = [*range(-K, 0), *range(1, K + 1)]
    return [(j, k, si) for j in js for k in range(1, K + 1) for si in range(len(S))]


def deal(primes: Iterable[int], n_cells: int) -> list[list[int]]:
    """Round-robin by decreasing 1/p."""
    hands: list[list[int]] = [[] for _ in range(n_cells)]
    for idx, p in enumerate(sorted(primes)):
        hands[idx % n_cells].append(p)
    return hands


def partition_sets(
    pairs: Sequence[PrimePair],
    K: int,
    S: Sequence[int],
    mode: str = PROPORTIONAL,
    M=None,
    eps: float = 0.5,
) -> dict[Cell, list[int]]:
    """Deal the primes of one P_a round-robin into the (j, k, s) cells.

    Primes go out in decreasing order of 1/p.  In strict mode every cell
    must reach harmonic mass M / (2 K^2 |S|) * (1 - eps).
    """
    cs = cells(K, S)
    if not cs:
        return {}
    if not pairs:
        raise InsufficientMassError("empty prime set cannot fill nonempty cells")
    out = dict(zip(cs, deal([pr.p for pr in pairs], len(cs))))
    if mode == STRICT:
        if M is None:
            raise ValueError("strict partition needs M")
        total = harmonic_mass(pr.p for pr in pairs)
        need = as_fraction(M) / len(cs)
        floor = need * (1 - as_fraction(eps))
        if total < as_fraction(M):
            raise InsufficientMassError(f"need total mass {float(as_fraction(M)):.6f}, have {float(total):.6f}")
        for c, ps in out.items():
            got = harmonic_mass(ps)
            if got < floor:
                raise InsufficientMassError(
                    f"cell {c}: need mass {float(floor):.6f}, have {float(got):.6f}"
                )
    elif mode != PROPORTIONAL:
        raise ValueError(f"unknown partition mode {mode!r}")
    return out


def choose_b(
    p_sets: dict[int, list[PrimePair]],
    partition: dict[int, dict[Cell, list[int]]],
    S: Sequence[int],
) -> tuple[int, int, list[Choice]]:
    """Pick b_p for every p and solve b = -b_p (mod q_p); returns (b, W, choices)."""
    by_p = {(pr.a, pr.p): pr for prs in p_sets.values() for pr in prs}
    choices: list[Choice] = []
    for a in sorted(partition):
        for (j, k, si), ps in partition[a].items():
            s = S[si]
            for p in ps:
                q = by_p[(a, p)].q
                kinv = pow(k, -1, q)
                for cls, c in enumerate((j + s, j * a + s)):
                    b_p = kinv * c % q
                    if b_p:
                        break
                else:
                    raise ConstructionError(
                        f"a={a} p={p} q={q} j={j} k={k} s={s}: neither residue class invertible"
                    )
                choices.append(Choice(a, p, q, j, k, s, cls, b_p))
    b, W = crt_combine([(-ch.b_p % ch.q, ch.q) for ch in choices])
    if math.gcd(b, W) != 1:
        raise ConstructionError("b is not a coprime residue class mod W")
    return b, W, choices


@dataclass
class CoveringSystem:
    K: int
    M: Fraction
    S: tuple[int, ...]
    p_sets: dict[int, list[PrimePair]]
    partition: dict[int, dict[Cell, list[int]]]
    W: int
    b: int
    choices: list[Choice] = field(default_factory=list)
    partition_mode: str = PROPORTIONAL

    def pairs(self) -> list[PrimePair]:
        return [pr for a in sorted(self.p_sets) for pr in self.p_sets[a]]

    def families(self) -> list[tuple[int, int, int, int]]:
        return [
            (a, j, k, self.S[si]) for a in sorted(self.partition) for (j, k, si) in self.partition[a]
        ]

    def cell_choices(self, a: int, j: int, k: int, s: int) -> list[Choice]:
        return [ch for ch in self.choices if (ch.a, ch.j, ch.k, ch.s) == (a, j, k, s)]

    # ---------------------------------------------------------- serialization

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "M": str(self.M),
            "S": [str(s) for s in self.S],
            "P": [
                {"a": pr.a, "p": pr.p, "q": str(pr.q), "certified_maximal": pr.certified_maximal}
                for pr in self.pairs()
            ],
            "partition_mode": self.partition_mode,
            "partition": [
                {"a": a, "j": j, "k": k, "s_index": si, "primes": ps}
                for a in sorted(self.partition)
                for (j, k, si), ps in self.partition[a].items()
            ],
            "W": str(self.W),
            "b": str(self.b),
            "choices": [
                {
                    "a": ch.a,
                    "p": ch.p,
                    "q": str(ch.q),
                    "j": ch.j,
                    "k": ch.k,
                    "s": str(ch.s),
                    "class": CLASS_NAMES[ch.cls],
                    "b_p": str(ch.b_p),
                }
                for ch in self.choices
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, doc: dict) -> CoveringSystem:
        S = tuple(int(s) for s in doc["S"])
        p_sets: dict[int, list[PrimePair]] = {}
        for e in doc["P"]:
            p_sets.setdefault(e["a"], []).append(
                PrimePair(e["a"], e["p"], int(e["q"]), e["certified_maximal"])
            )
        partition: dict[int, dict[Cell, list[int]]] = {}
        for e in doc["partition"]:
            partition.setdefault(e["a"], {})[(e["j"], e["k"], e["s_index"])] = list(e["primes"])
        choices = [
            Choice(e["a"], e["p"], int(e["q"]), e["j"], e["k"], int(e["s"]), CLASS_NAMES.index(e["class"]), int(e["b_p"]))
            for e in doc["choices"]
        ]
        return cls(
            doc["K"], Fraction(doc["M"]), S, p_sets, partition, int(doc["W"]), int(doc["b"]),
            choices, doc.get("partition_mode", PROPORTIONAL),
        )


def build_system(
    K: int,
    M,
    S: Iterable[int] = (0,),
    effort: Effort = DEFAULT_EFFORT,
    partition_mode: str = PROPORTIONAL,
    min_prime: int = 5,
    prime_cap: int = 10**4,
) -> CoveringSystem:
    S = tuple(sorted(set(S)))
    if not S:
        raise ValueError("S must be nonempty")
    p_sets = build_p_sets(K, M, effort, min_prime, prime_cap)
    partition = {
        a: partition_sets(pairs, K, S, partition_mode, M) for a, pairs in p_sets.items()
    }
    b, W, choices = choose_b(p_sets, partition, S)
    return CoveringSystem(K, as_fraction(M), S, p_sets, partition, W, b, choices, partition_mode)


def verify_system(system: CoveringSystem) -> list[str]:
    """Check every structural invariant; returns human-readable violations."""
    bad: list[str] = []
    qs = [pr.q for pr in system.pairs()]
    ps = [pr.p for pr in system.pairs()]
    if len(set(qs)) != len(qs):
        bad.append("q_p not pairwise distinct")
    if len(set(ps)) != len(ps):
        bad.append("P_a not pairwise disjoint")
    for pr in system.pairs():
        tag = f"a={pr.a} p={pr.p} q={pr.q}"
        if primality(pr.q) == arith.COMPOSITE:
            bad.append(f"{tag}: q not prime")
        if pr.q <= system.K:
            bad.append(f"{tag}: q <= K")
        if (pr.a**pr.p - 1) % pr.q:
            bad.append(f"{tag}: q does not divide a^p - 1")
        if pr.q % pr.p != 1:
            bad.append(f"{tag}: q != 1 (mod p)")
        if not has_order(pr.a, pr.q, pr.p):
            bad.append(f"{tag}: order of a mod q is not p")
    for a in range(2, system.K + 1):
        mass = harmonic_mass(pr.p for pr in system.p_sets.get(a, []))
        if mass < system.M:
            bad.append(f"a={a}: harmonic mass {float(mass)} < M")
    W = 1
    for q in qs:
        W *= q
    if W != system.W:
        bad.append("W is not the product of the q_p")
    if math.gcd(system.b, system.W) != 1:
        bad.append("gcd(b, W) != 1")
    for ch in system.choices:
        if (system.b + ch.b_p) % ch.q:
            bad.append(f"p={ch.p}: b != -b_p (mod q_p)")
    return bad


def qo1_check(system_or_pairs) -> tuple[float, float]:
    """(sum of 1/q_p, sum of 1/(p ln p)) over the pairs of the system."""
    pairs = system_or_pairs.pairs() if isinstance(system_or_pairs, CoveringSystem) else system_or_pairs
    inv_q = math.fsum(1 / pr.q for pr in pairs)
    ref = math.fsum(1 / (pr.p * math.log(pr.p)) for pr in pairs)
    return inv_q, ref


# ------------------------------------------------------------------ audit


@dataclass
class CoverageAudit:
    family: tuple[int, int, int, int]
    i_max: int
    primes: list[int]
    covered: int
    uncovered: int
    predicted_bound: Fraction
    violations: list[str] = field(default_factory=list)

    @property
    def slack_bound(self) -> Fraction:
        return self.predicted_bound + len(self.primes) + 1

    @property
    def within_bound(self) -> bool:
        return self.uncovered <= self.slack_bound

    def empirical_exponent(self) -> float | None:
        """-ln(prod(1 - 1/p)) divided by the cell's harmonic mass."""
        if not self.primes:
            return None
        mass = harmonic_mass(self.primes)
        return -math.fsum(math.log1p(-1 / p) for p in self.primes) / float(mass)

    def record(self) -> dict:
        a, j, k, s = self.family
        theta = self.empirical_exponent()
        return {
            "a": a,
            "j": j,
            "k": k,
            "s": str(s),
            "i_max": self.i_max,
            "primes": self.primes,
            "covered": self.covered,
            "uncovered": self.uncovered,
            "predicted_bound": f"{float(self.predicted_bound):.15g}",
            "within_bound": self.within_bound,
            "exponent": None if theta is None else f"{theta:.15g}",
            "violations": self.violations,
        }


def audit_coverage(
    system: CoveringSystem, family: tuple[int, int, int, int], i_max: int, strict: bool = True
) -> CoverageAudit:
    """Recount the uncovered exponents of one (a, j, k, s) family directly.

    An exponent i is covered when some q_p of the cell divides k*b + j*a^i + s.
    Every i in the chosen class mod p must be covered, and nothing outside it.
    """
    a, j, k, s = family
    chosen = system.cell_choices(a, j, k, s)
    covered = bytearray(i_max + 1)
    violations: list[str] = []
    for ch in chosen:
        x = 1  # a^i mod q
        base = k * system.b + s
        for i in range(i_max + 1):
            divides = (base + j * x) % ch.q == 0
            in_class = i % ch.p == ch.cls % ch.p
            if divides != in_class:
                violations.append(f"p={ch.p} q={ch.q} i={i}: divides={divides} in_class={in_class}")
            if divides:
                covered[i] = 1
            x = x * a % ch.q
    n_cov = sum(covered)
    bound = Fraction(i_max + 1)
    for ch in chosen:
        bound *= 1 - Fraction(1, ch.p)
    audit = CoverageAudit(family, i_max, [ch.p for ch in chosen], n_cov, i_max + 1 - n_cov, bound, violations)
    if strict and violations:
        raise CoverageError(f"family {family}: {violations[0]} ({len(violations)} violations)")
    return audit


def _audit_one(args) -> CoverageAudit:
    system, family, i_max = args
    return audit_coverage(system, family, i_max, strict=False)


def audit_all(system: CoveringSystem, i_max: int, threads: int = 1) -> list[CoverageAudit]:
    jobs = [(system, fam, i_max) for fam in system.families()]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_audit_one, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    return [_audit_one(j) for j in jobs]
