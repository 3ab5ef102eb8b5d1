import math
import random

import pytest

from delicate.arith import is_prime
from delicate.delicacy import (
    TAO_BOX,
    THEOREM2_BOX,
    NotPrimeError,
    SearchStats,
    density_report,
    is_digitally_delicate,
    is_widely_delicate,
    search_interval,
    search_theorem,
    value_acceptable,
)
from delicate.digits import Perturbation, PerturbationBox, enumerate_box, tao_box

from oracles import fast_trial_is_prime, naive_digit_variants, naive_digitally_delicate


def test_294001_passes():
    rep = is_digitally_delicate(294001, 10)
    assert rep.passed and rep.witness is None
    assert rep.tested == 54
    assert naive_digitally_delicate(294001)


def test_13_fails_with_least_witness():
    rep = is_digitally_delicate(13, 10)
    assert rep.verdict == "fail"
    primes = sorted(v for v in naive_digit_variants(13, 10) if fast_trial_is_prime(v))
    assert rep.witness_value == primes[0] == 3
    assert 23 in primes
    assert rep.witness.value_of(13) == 3


def test_2_fails():
    rep = is_digitally_delicate(2, 10)
    assert rep.verdict == "fail"
    assert rep.witness_value == 3


def test_rejects_composite():
    with pytest.raises(NotPrimeError):
        is_digitally_delicate(15, 10)


def test_units_are_acceptable_in_digit_change_mode():
    # 101 -> 001 = 1 is a variant; it must not count as a prime witness
    rep = is_digitally_delicate(101, 10)
    assert rep.le1 >= 1
    assert rep.witness_value != 1


def test_box_unit_value_fails():
    p = 7
    box = PerturbationBox.make(2, p, (-2 * p,))
    rep = is_widely_delicate(p, box)
    assert rep.verdict == "fail"
    assert Perturbation(1, 0, 1, 2, -2 * p).value_of(p) == 1
    # the unit tuple is reached if earlier tuples all pass; check it is a failure itself
    unit = PerturbationBox.make(2, p, (-2 * p,), i_max=0)
    assert any(t.value_of(p) == 1 for t in enumerate_box(unit))


def test_box_p5_first_witness():
    box = PerturbationBox.make(2, 5, (0,))
    rep = is_widely_delicate(5, box)
    # brute force over the enumeration order
    first = next(
        t
        for t in enumerate_box(box)
        if not (t.value_of(5) == 5 or (t.value_of(5) > 1 and not fast_trial_is_prime(t.value_of(5))))
    )
    assert rep.witness == first == Perturbation(1, 0, -2, 1, 0)
    assert rep.witness_value == 3
    assert Perturbation(1, 0, 1, 1, 0).value_of(5) == 6
    assert Perturbation(1, 0, 2, 1, 0).value_of(5) == 7


def test_value_predicate_modes():
    p = 11
    t = Perturbation(2, 1, 1, 1, -2)  # j a^i + s = 0, k = 1
    assert t.value_of(p) == p
    assert value_acceptable(p, p, THEOREM2_BOX)
    assert not value_acceptable(p, p, TAO_BOX)
    for mode in (THEOREM2_BOX, TAO_BOX):
        assert not value_acceptable(0, p, mode)
        assert not value_acceptable(1, p, mode)
        assert not value_acceptable(13, p, mode)
        assert value_acceptable(15, p, mode)


def test_self_value_counted_in_report():
    p = 11
    box = PerturbationBox.make(2, p, (-2,), i_max=1)
    rep = is_widely_delicate(p, box, THEOREM2_BOX)
    seen = list(enumerate_box(box))[: rep.tested]
    assert rep.equal_p == sum(1 for t in seen if t.value_of(p) == p)


def test_monotone_exclusion():
    # digit-change failure in base a embeds into the tao box with K >= a
    for a in (2, 3, 5):
        for p in [q for q in range(3, 400) if is_prime(q)]:
            dc = is_digitally_delicate(p, a)
            if dc.passed:
                continue
            L = len(naive_digit_variants(p, a)) // (a - 1)
            box = tao_box(a, p, i_max=L)
            assert not is_widely_delicate(p, box, TAO_BOX).passed
            box2 = PerturbationBox.make(a, p, (0,), i_max=L)
            assert not is_widely_delicate(p, box2, THEOREM2_BOX).passed


def test_reported_passes_survive_random_retest():
    rng = random.Random(11)
    found = []
    box = None
    for p in [q for q in range(10**4, 2 * 10**4) if is_prime(q)]:
        box = PerturbationBox.make(2, p, (0,), i_max=6)
        if is_widely_delicate(p, box).passed:
            found.append((p, box))
        if len(found) >= 3:
            break
    assert found
    for p, box in found:
        tuples = list(enumerate_box(box))
        for t in rng.sample(tuples, min(100, len(tuples))):
            v = t.value_of(p)
            assert v == p or (v > 1 and not fast_trial_is_prime(v))


def test_order_permutation_keeps_verdict():
    box = PerturbationBox.make(2, 1000, (0,), i_max=5)
    primes = [q for q in range(1000, 1300) if is_prime(q)]
    rng = random.Random(3)
    tuples = list(enumerate_box(box))
    for p in primes:
        ok = is_widely_delicate(p, box).passed
        shuffled = tuples[:]
        rng.shuffle(shuffled)
        ok2 = all(
            t.value_of(p) == p or (t.value_of(p) > 1 and not is_prime(t.value_of(p))) for t in shuffled
        )
        assert ok == ok2


def test_e_counter_bounded():
    # |k m + c| <= 1 has at most 3 integer solutions m, hence per tuple at most 3 primes
    box = PerturbationBox.make(2, 50, (-50, 3), i_max=4)
    primes = [q for q in range(2, 200) if is_prime(q)]
    for t in enumerate_box(box):
        hits = [m for m in primes if t.value_of(m) <= 1]
        assert len(hits) <= 3


def test_search_matches_oracle(oracle_delicate_1e6):
    res = search_interval(2, 10**6)
    assert res.passing == oracle_delicate_1e6
    assert res.passing[:5] == [294001, 505447, 584141, 604171, 971767]


def test_search_small_interval_no_passes():
    res = search_interval(100, 110)
    assert res.passing == []
    assert res.stats.Q_N == 4


def test_search_class_mod_2_counts_odd_primes():
    res = search_interval(2, 1000, residue_class=(1, 2))
    assert res.stats.Q_N == 167


def test_vector_and_scalar_paths_agree():
    lo, hi = 280_000, 300_000
    res = search_interval(lo, hi, keep_reports=True)
    for rep in res.reports[::25]:
        ref = is_digitally_delicate(rep.p, 10)
        assert (rep.verdict, rep.witness_value, rep.le1) == (ref.verdict, ref.witness_value, ref.le1)


def test_search_sharding_invariant():
    a = search_interval(2, 50_000, base=3)
    b = search_interval(2, 50_000, base=3, shards=7)
    assert a.passing == b.passing and a.stats == b.stats


def test_search_threads_identical():
    a = search_interval(2, 200_000, shards=4)
    b = search_interval(2, 200_000, shards=4, threads=2)
    assert a.passing == b.passing and a.stats == b.stats


def test_box_search_matches_direct_checks():
    box = PerturbationBox.make(2, 2000, (0, 1), i_max=8)
    res = search_interval(2000, 3000, mode=THEOREM2_BOX, box=box, shards=3)
    direct = [p for p in range(2000, 3001) if is_prime(p) and is_widely_delicate(p, box).passed]
    assert res.passing == direct
    assert res.stats.K_N <= res.stats.Q_N


def test_density_rows():
    st = SearchStats(10, 15, Q_N=0, K_N=0)
    assert density_report([(10, st)]) == [(10, 0, 0, 0.0)]
    r1 = density_report([(10**4, search_theorem(10**4, 2).stats)])
    r2 = density_report([(10**4, search_theorem(10**4, 2).stats)])
    assert r1 == r2


def test_density_at_1e6_matches_oracle():
    N, K = 10**6, 2
    lo, hi = N, N + N // K
    count = sum(1 for p in range(lo, hi + 1) if fast_trial_is_prime(p) and naive_digitally_delicate(p))
    (row,) = density_report([(N, search_theorem(N, K).stats)])
    assert row[2] == count
    assert row[3] == pytest.approx(count * math.log(N) / N, rel=1e-15)
