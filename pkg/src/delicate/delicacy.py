"""Delicacy predicates, interval searches and density tables."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from . import arith
from .arith import COMPOSITE, PROBABLE, primality, segmented_sieve
from .digits import (
    Perturbation,
    PerturbationBox,
    digit_change_perturbation,
    enumerate_box,
    single_digit_variants,
)

DIGIT_CHANGE = "digit-change"
TAO_BOX = "tao-box"
THEOREM2_BOX = "theorem2-box"
MODES = (DIGIT_CHANGE, TAO_BOX, THEOREM2_BOX)

# Largest lookup sieve used by the vectorised digit-change scan (entries).
LOOKUP_CAP = 1 << 27


class NotPrimeError(ValueError):
    pass


@dataclass
class DelicacyReport:
    p: int
    mode: str
    verdict: str
    witness: Perturbation | None = None
    witness_value: int | None = None
    witness_status: str | None = None
    tested: int = 0
    le1: int = 0
    equal_p: int = 0
    p_status: str = arith.PRIME

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def record(self) -> dict:
        w = None
        if self.witness is not None:
            w = {**self.witness.as_dict(), "value": json_int(self.witness_value)}
            if self.witness_status == PROBABLE:
                w["status"] = PROBABLE
        rec = {"p": json_int(self.p), "mode": self.mode, "verdict": self.verdict, "witness": w}
        if self.p_status == PROBABLE:
            rec["p_status"] = PROBABLE
        return rec


def json_int(n: int | None):
    """Integers beyond exact double range are written as decimal strings."""
    if n is None or abs(n) < 1 << 53:
        return n
    return str(n)


def _require_prime(p: int) -> str:
    status = primality(p)
    if status == COMPOSITE:
        raise NotPrimeError(f"{p} is not prime")
    return status


def is_digitally_delicate(p: int, a: int = 10) -> DelicacyReport:
    """Every single-digit change of p is composite, 0 or 1.

    On failure the witness is the least prime variant.
    """
    status = _require_prime(p)
    report = DelicacyReport(p, DIGIT_CHANGE, "pass", p_status=status)
    best = None
    for v in single_digit_variants(p, a):
        report.tested += 1
        if v <= 1:
            report.le1 += 1
            continue
        vs = primality(v)
        if vs != COMPOSITE and (best is None or v < best[0]):
            best = (v, vs)
    if best is not None:
        report.verdict = "fail"
        report.witness_value, report.witness_status = best
        report.witness = digit_change_perturbation(p, a, best[0])
    return report


def value_acceptable(v: int, p: int, mode: str, status: str | None = None) -> bool:
    """Whether a perturbed value v of p is harmless under a box mode."""
    if v <= 1:
        return False
    if v == p:
        return mode == THEOREM2_BOX
    return (status or primality(v)) == COMPOSITE


def is_widely_delicate(p: int, box: PerturbationBox, mode: str = THEOREM2_BOX) -> DelicacyReport:
    """Check |k*p + j*a^i + s| over the whole box.

    theorem2-box accepts a value equal to p or composite; tao-box accepts
    composite values only.  In both modes 0 and 1 fail.  The witness is the
    first failing tuple in enumeration order.
    """
    if mode not in (TAO_BOX, THEOREM2_BOX):
        raise ValueError(f"unknown box mode {mode!r}")
    status = _require_prime(p)
    report = DelicacyReport(p, mode, "pass", p_status=status)
    for pert in enumerate_box(box):
        v = pert.value_of(p)
        report.tested += 1
        if v <= 1:
            report.le1 += 1
        elif v == p:
            report.equal_p += 1
        vs = primality(v)
        if not value_acceptable(v, p, mode, vs):
            report.verdict = "fail"
            report.witness, report.witness_value, report.witness_status = pert, v, vs
            break
    return report


def check_prime(p: int, mode: str, base: int = 10, box: PerturbationBox | None = None) -> DelicacyReport:
    if mode == DIGIT_CHANGE:
        return is_digitally_delicate(p, base)
    if box is None:
        raise ValueError(f"mode {mode} needs a perturbation box")
    return is_widely_delicate(p, box, mode)


# ----------------------------------------------------------------- search


@dataclass
class SearchStats:
    lo: int
    hi: int  # inclusive
    W: int = 1
    b: int = 0
    Q_N: int = 0
    E: int = 0
    K_N: int = 0
    probable: int = 0

    def merge(self, other: SearchStats) -> SearchStats:
        return replace(
            self,
            lo=min(self.lo, other.lo),
            hi=max(self.hi, other.hi),
            Q_N=self.Q_N + other.Q_N,
            E=self.E + other.E,
            K_N=self.K_N + other.K_N,
            probable=self.probable + other.probable,
        )

    def record(self) -> dict:
        return {
            "interval": [json_int(self.lo), json_int(self.hi)],
            "W": str(self.W),
            "b": str(self.b),
            "Q_N": self.Q_N,
            "E": self.E,
            "K_N": self.K_N,
            "probable": self.probable,
        }


@dataclass
class SearchResult:
    stats: SearchStats
    passing: list[int]
    reports: list[DelicacyReport] = field(default_factory=list)


def theorem_interval(N: int, K: int) -> tuple[int, int]:
    """The closed interval [N, (1 + 1/K) N] on the integers."""
    return N, N + N // K


def _variant_bound(top: int, a: int) -> tuple[int, int]:
    """(L, a^L) where L is the digit count of top; all variants are < a^L."""
    L = 1
    while a**L <= top:
        L += 1
    return L, a**L


def _digit_change_scan(primes: np.ndarray, a: int, keep_reports: bool):
    """Vectorised digit-change test for an array of primes.

    Returns (passed mask, has-value-<=1 mask, reports or None).
    """
    n = len(primes)
    L, bound = _variant_bound(int(primes.max()), a)
    P = primes.astype(np.int64)
    big = np.iinfo(np.int64).max
    wval = np.full(n, big, dtype=np.int64)
    wpos = np.zeros(n, dtype=np.int64)
    wdelta = np.zeros(n, dtype=np.int64)
    le1 = np.zeros(n, dtype=bool)
    lookup = segmented_sieve(0, bound)
    for t in range(L):
        w = a**t
        present = P >= w if t else np.ones(n, bool)
        dig = (P // w) % a
        for d in range(a):
            delta = d - dig
            valid = present & (delta != 0)
            v = P + delta * w
            le1 |= valid & (v <= 1)
            better = valid & lookup.lookup(v) & (v < wval)
            wval = np.where(better, v, wval)
            wpos = np.where(better, t, wpos)
            wdelta = np.where(better, delta, wdelta)
    passed = wval == big
    reports = None
    if keep_reports:
        reports = []
        for idx in range(n):
            p = int(P[idx])
            ndig = 1
            while a**ndig <= p:
                ndig += 1
            rep = DelicacyReport(p, DIGIT_CHANGE, "pass", tested=ndig * (a - 1))
            rep.le1 = sum(1 for v in _low_variants(p, a))
            if not passed[idx]:
                rep.verdict = "fail"
                rep.witness = Perturbation(a, int(wpos[idx]), int(wdelta[idx]), 1, 0)
                rep.witness_value = int(wval[idx])
                rep.witness_status = arith.PRIME
            reports.append(rep)
    return passed, le1, reports


def _low_variants(p: int, a: int):
    # only the leading digit can drop a variant to 0 or 1
    return [v for v in single_digit_variants(p, a) if v <= 1]


@dataclass(frozen=True)
class _Task:
    lo: int
    hi: int
    mode: str
    base: int
    box: PerturbationBox | None
    W: int
    b: int
    keep_reports: bool


def _run_task(task: _Task) -> SearchResult:
    stats = SearchStats(task.lo, task.hi, task.W, task.b)
    sieve = segmented_sieve(task.lo, task.hi + 1)
    primes = sieve.primes()
    if task.W > 1:
        primes = primes[primes % task.W == task.b % task.W]
    stats.Q_N = len(primes)
    reports: list[DelicacyReport] = []
    passing: list[int] = []
    if (
        task.mode == DIGIT_CHANGE
        and len(primes)
        and _variant_bound(int(primes.max()), task.base)[1] <= LOOKUP_CAP
    ):
        passed, le1, reps = _digit_change_scan(primes, task.base, task.keep_reports)
        passing = [int(p) for p in primes[passed]]
        stats.E = int(np.count_nonzero(le1))
        reports = reps or []
    else:
        for p in primes:
            rep = check_prime(int(p), task.mode, task.base, task.box)
            if rep.le1:
                stats.E += 1
            if rep.witness_status == PROBABLE:
                stats.probable += 1
            if rep.passed:
                passing.append(rep.p)
            if task.keep_reports:
                reports.append(rep)
    stats.K_N = len(passing)
    return SearchResult(stats, passing, reports)


def _shards(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, hi - lo + 1))
    step = -(-(hi - lo + 1) // parts)
    return [(s, min(s + step - 1, hi)) for s in range(lo, hi + 1, step)]


def search_interval(
    lo: int,
    hi: int,
    mode: str = DIGIT_CHANGE,
    base: int = 10,
    box: PerturbationBox | None = None,
    residue_class: tuple[int, int] | None = None,
    threads: int = 1,
    keep_reports: bool = False,
    shards: int | None = None,
) -> SearchResult:
    """Test every prime in the closed interval [lo, hi], optionally only m = b (mod W).

    The interval is split into shards that may run in worker processes; the
    merged result does not depend on the split.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if hi < lo:
        raise ValueError("empty interval")
    if mode != DIGIT_CHANGE and box is None:
        raise ValueError(f"{mode} search needs a perturbation box")
    b, W = residue_class if residue_class else (0, 1)
    if math.gcd(b, W) != 1:
        raise ValueError(f"residue class {b} mod {W} is not coprime")
    n_shards = shards or max(threads, 1)
    tasks = [_Task(s, e, mode, base, box, W, b % W, keep_reports) for s, e in _shards(lo, hi, n_shards)]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_run_task, tasks))
    else:
        parts = [_run_task(t) for t in tasks]
    stats = parts[0].stats
    for part in parts[1:]:
        stats = stats.merge(part.stats)
    passing = sorted(p for part in parts for p in part.passing)
    reports = sorted((r for part in parts for r in part.reports), key=lambda r: r.p)
    return SearchResult(stats, passing, reports)


def search_theorem(N: int, K: int, **kw) -> SearchResult:
    lo, hi = theorem_interval(N, K)
    return search_interval(lo, hi, **kw)


# ---------------------------------------------------------------- density

DENSITY_HEADER = ("N", "Q_N", "K_N", "ratio")


def density_report(results: Iterable[tuple[int, SearchStats]]) -> list[tuple[int, int, int, float]]:
    """Rows (N, Q_N, K_N, K_N * ln N / N)."""
    rows = []
    for N, st in results:
        ratio = st.K_N * math.log(N) / N if st.K_N else 0.0
        rows.append((N, st.Q_N, st.K_N, ratio))
    return rows
