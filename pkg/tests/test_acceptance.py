"""Exit criteria; each test records one pass/fail line in the terminal summary."""

import math
import random
import time
from fractions import Fraction

import pytest

from delicate import analytic, covering
from delicate.arith import is_prime, multiplicative_order, small_primes
from delicate.cli import run
from delicate.delicacy import search_interval

from oracles import trial_factor


@pytest.fixture
def report(acceptance_log, request):
    def _report(number, title, ok, detail=""):
        acceptance_log.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} {detail}".rstrip())
        assert ok, detail

    return _report


def test_c1_digit_change_search_matches_oracle(report, oracle_delicate_1e6):
    t0 = time.perf_counter()
    res = search_interval(2, 10**6, threads=1)
    elapsed = time.perf_counter() - t0
    ok = res.passing == oracle_delicate_1e6 and res.passing[:5] == oracle_delicate_1e6[:5] and elapsed < 60
    report(1, "digit-change search == naive oracle on [2, 1e6]", ok, f"({len(res.passing)} primes, {elapsed:.2f}s)")


SYSTEMS = [(2, "0.2"), (2, "0.5"), (3, "0.2")]


@pytest.fixture(scope="module")
def systems():
    out = {}
    for K, M in SYSTEMS:
        t0 = time.perf_counter()
        out[(K, M)] = (covering.build_system(K, M), time.perf_counter() - t0)
    return out


def test_c2_covering_invariants(report, systems):
    problems = []
    for (K, M), (system, elapsed) in systems.items():
        if elapsed >= 300:
            problems.append(f"K={K} M={M} took {elapsed:.0f}s")
        pairs = system.pairs()
        for pr in pairs:
            # (i) and the order property
            if not (pr.q > K and (pr.a**pr.p - 1) % pr.q == 0 and is_prime(pr.q)):
                problems.append(f"(i) fails for {pr}")
            if pr.certified_maximal and pr.q != max(trial_factor(pr.a**pr.p - 1)):
                problems.append(f"q is not P(a^p-1) for {pr}")
            if pr.q % pr.p != 1 or multiplicative_order(pr.a, pr.q) != pr.p:
                problems.append(f"order fails for {pr}")
        # (ii)
        qs = [pr.q for pr in pairs]
        if len(set(qs)) != len(qs):
            problems.append(f"K={K} M={M}: q_p repeat")
        # (iii)
        for a in range(2, K + 1):
            if sum(Fraction(1, pr.p) for pr in system.p_sets[a]) < Fraction(M):
                problems.append(f"K={K} M={M}: mass too small for a={a}")
        if math.prod(qs) != system.W or math.gcd(system.b, system.W) != 1:
            problems.append(f"K={K} M={M}: W/b wrong")
        problems += covering.verify_system(system)
    report(2, "covering invariants for (K, M) in (2,0.2), (2,0.5), (3,0.2)", not problems, "; ".join(problems))


def test_c3_coverage_audit(report, systems):
    i_max = 10**4
    violations = over = families = 0
    for system, _ in systems.values():
        for au in covering.audit_all(system, i_max):
            families += 1
            violations += len(au.violations)
            over += au.uncovered > au.predicted_bound + len(au.primes) + 1
            # explicit recheck of the designated class
            a, j, k, s = au.family
            for ch in system.cell_choices(a, j, k, s):
                for i in range(ch.cls, i_max + 1, ch.p):
                    if (k * system.b + j * pow(a, i, ch.q) + s) % ch.q:
                        violations += 1
    report(3, "coverage audit over i <= 1e4", violations == 0 and over == 0, f"({families} families, {violations} violations, {over} over bound)")


def test_c4_square_identity(report):
    primes = [int(p) for p in small_primes(10**4)]
    bad = [p for p in primes if (lambda lr: lr[0] != lr[1])(analytic.square_identity_check(p))]
    report(4, "(1-1/p)^-2 identity exact for p <= 1e4", not bad, f"({len(primes)} primes)")


def test_c5_smooth_sum(report):
    bad = [y for y in range(2, 31) if not analytic.smooth_squarefree_sum(y).equal]
    report(5, "smooth squarefree divisor sum == product for y <= 30", not bad, f"bad={bad}" if bad else "")


def test_c6_romanoff(report):
    Xs = (10**3, 10**4, 10**5)
    runs = {t: [analytic.romanoff_partial_sum(10, 2, X, threads=t) for X in Xs] for t in (1, 4)}
    again = [analytic.romanoff_partial_sum(10, 2, X) for X in Xs]
    sums = [e.partial_sum for e in runs[1]]
    incs = [e.last_block_increment for e in runs[1]]
    shape = sums[0] < sums[1] < sums[2] and incs[0] > incs[1] > incs[2]
    fmt = lambda ests: [f"{e.partial_sum:.12g}" for e in ests]
    repro = fmt(runs[1]) == fmt(runs[4]) == fmt(again)
    report(6, "Romanoff (A=10, S=2) increasing sums, decreasing blocks, reproducible", shape and repro, f"sums={fmt(runs[1])}")


def test_c7_residue_class(report):
    rng = random.Random(20161)
    bad = 0
    for _ in range(10**3):
        while True:
            d = rng.randint(2, 10**4)
            if all(e == 1 for e in trial_factor(d).values()):
                break
        a = rng.randint(2, 10)
        j = rng.choice([-3, -2, -1, 1, 2, 3])
        s = -j * pow(a, rng.randint(1, 40)) + d * rng.randint(-3, 3)
        rc = analytic.residue_class_of_i(d, a, j, s)
        upto = 10 * rc.modulus
        sols = analytic.scan_solutions(d, a, j, s, upto)
        members = [i for i in range(1, upto + 1) if i % rc.modulus == rc.residue % rc.modulus]
        bad += sols != members
    report(7, "exponent solutions fill exactly one class mod ord_a(d/B_d)", bad == 0, f"(1000 instances, {bad} bad)")


def test_c8_sieve_ratio_band(report):
    grid = [10**5, 10**6, 10**7]
    rows = []
    for W in (1, 6, 30):
        bs = [b for b in range(W) if math.gcd(b, W) == 1 and math.gcd(b + 2, W) == 1] or [0]
        for b in bs:
            rows += analytic.sieve_ratio_experiment(grid, W, b, 1, 2)
    base = next(r for r in rows if r.W == 1 and r.x == 10**6)
    ok = all(0.5 <= r.ratio <= 3.0 for r in rows) and base.count == 8169
    lo, hi = min(r.ratio for r in rows), max(r.ratio for r in rows)
    report(8, "sieve ratio in [0.5, 3.0] for W in {1, 6, 30}, x in {1e5, 1e6, 1e7}", ok, f"(ratios {lo:.3f}..{hi:.3f})")


CLI_COMMANDS = [
    ["search", "--interval", "2:300000"],
    ["search", "--interval", "2000:3000", "--mode", "theorem2-box", "--K", "2", "--N", "2000", "--s-set", "0,1"],
    ["audit", "--K", "2", "--M", "0.5"],
    ["series", "--A", "10", "--S", "2", "--X", "1000,10000,30000"],
    ["sieve-ratio", "--x-grid", "100000,1000000", "--W", "30", "--b", "11"],
]


def test_c9_threads_determinism(report, tmp_path):
    differing = []
    for idx, argv in enumerate(CLI_COMMANDS):
        outs = []
        for t in (1, 8):
            path = tmp_path / f"{idx}-{t}.out"
            assert run([*argv, "--threads", str(t), "--out", str(path)]) == 0
            outs.append(path.read_bytes())
        if outs[0] != outs[1]:
            differing.append(argv[0])
    report(9, "CLI output byte-identical for --threads 1 vs 8", not differing, f"differing={differing}" if differing else "")
