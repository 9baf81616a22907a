import itertools

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from conftest import EX1, EX2
from relay4.model import STREAMS, GainVector, RateTuple
from relay4.region import (Family, MaxPair, all_conditions, catalog, check, condition_by_id, evaluate,
                           in_region, lemma1_conditions, membership_batch, theorem1_conditions)

rates_st = st.lists(st.integers(0, 4), min_size=12, max_size=12).map(lambda v: RateTuple(tuple(v)))


def test_region_has_thirteen_conditions():
    conds = theorem1_conditions()
    assert len(conds) == 13
    fams = [c.family for c in conds]
    assert fams.count(Family.DL) == 5 and fams.count(Family.UL) == 5 and fams.count(Family.COMMON) == 3
    assert [c.bound for c in conds if c.family is Family.COMMON] == [1, 1, 1]


def test_every_stream_is_constrained():
    covered = set().union(*(c.streams() for c in theorem1_conditions()))
    assert covered == set(STREAMS)


def _forms6(i, j, k, l):
    cyc = [(i, j), (j, k), (k, i)]
    return frozenset(tuple(sorted(cyc + br)) for br in ([(l, i), (l, j), (l, k)], [(i, l), (j, l), (k, l)]))


def _forms7(i, j, k, l):
    cyc = [(i, j), (j, k), (k, l), (l, i)]
    return frozenset(tuple(sorted(cyc + [a, b])) for a in ((j, l), (l, j)) for b in ((i, k), (k, i)))


def test_direct_condition_counts_match_brute_force_dedupe():
    # oracle: expand the printed forms over all 24 labelings and count distinct ones
    six = {_forms6(*p) for p in itertools.permutations((1, 2, 3, 4))}
    seven = {_forms7(*p) for p in itertools.permutations((1, 2, 3, 4))}
    assert (len(six), len(seven)) == (8, 6)
    conds = lemma1_conditions()
    assert len(conds) == 16
    got6 = {frozenset(tuple(sorted(f)) for f in c.linear_forms()) for c in conds if c.family is Family.EXTRA_6}
    got7 = {frozenset(tuple(sorted(f)) for f in c.linear_forms()) for c in conds if c.family is Family.EXTRA_7}
    assert got6 == six and got7 == seven


def test_extra6_carries_cycle_metadata():
    for c in lemma1_conditions():
        if c.family is Family.EXTRA_6:
            assert len(c.cycle) == 3 and c.leftover not in c.cycle
            assert set(c.cycle) | {c.leftover} == {1, 2, 3, 4}
        if c.family is Family.EXTRA_7:
            assert sorted(c.cycle) == [1, 2, 3, 4]


def test_region_holds_on_both_examples(g7654):
    for r in (EX1, EX2):
        assert all(not evaluate(c, r, g7654).violated for c in theorem1_conditions())
        assert in_region(r, g7654)


def test_example1_three_cycle_condition(g7654):
    gp = evaluate(condition_by_id("X6[1>2>4|3]"), EX1, g7654)
    assert (gp.lhs, gp.rhs, gp.gap) == (8, 7, 1)


def test_example2_four_cycle_condition(g7654):
    gp = evaluate(condition_by_id("X7[1>4>3>2]"), EX2, g7654)
    assert (gp.lhs, gp.rhs, gp.gap) == (9, 7, 2)


def test_max_pair_atom():
    r = RateTuple.from_mapping({(3, 4): 1})
    assert MaxPair((3, 4), (4, 3)).value(r) == 1


def test_common_condition_hand_evaluated(g7654):
    # max(R13+R14+R23+R24, R31+R41+R32+R42) + max(R12,R21) + max(R34,R43) = 3 + 2 + 1
    gp = evaluate(condition_by_id("C3"), EX1, g7654)
    assert gp.lhs == 6 and not gp.violated


def test_zero_rates_gap_is_minus_rhs(g7654):
    z = RateTuple.zeros()
    for c in all_conditions():
        assert evaluate(c, z, g7654).gap == -g7654[c.bound]


def test_check_examples(g7654):
    rep = check(EX1, g7654)
    assert rep.in_region and not rep.sos_feasible
    assert rep.mgc.condition_id == "X6[1>2>4|3]" and rep.mgc.gap == 1
    rep = check(EX2, g7654)
    assert rep.in_region and not rep.sos_feasible
    assert rep.mgc.condition_id == "X7[1>4>3>2]" and rep.mgc.gap == 2


def test_single_inequality_violation(g7654):
    r = RateTuple.from_mapping({(1, 4): 2, (2, 4): 2, (3, 4): 2})
    rep = check(r, g7654)
    assert not rep.in_region
    assert "DL1" in [gp.condition_id for gp in rep.violated]
    assert [gp.gap for gp in rep.violated if gp.condition_id == "DL1"] == [2]


def test_mgc_tie_goes_to_catalog_order():
    g = GainVector((7, 6, 5, 4))
    r = EX2
    rep = check(r, g)
    top = max(gp.gap for gp in rep.extra_violated)
    tied = [gp for gp in rep.extra_violated if gp.gap == top]
    assert rep.mgc == min(tied, key=lambda gp: gp.condition.index)


@given(rates_st)
def test_report_invariants(r):
    g = GainVector((5, 4, 3, 2))
    rep = check(r, g)
    assert rep.in_region == (not rep.violated)
    if rep.sos_feasible:
        assert rep.in_region and not rep.extra_violated and rep.mgc is None
    if rep.extra_violated:
        assert rep.mgc.gap == max(gp.gap for gp in rep.extra_violated)


@given(st.lists(rates_st, min_size=1, max_size=20))
def test_batch_matches_scalar(rs):
    g = GainVector((4, 3, 2, 2))
    R = np.array([r.values for r in rs])
    assert list(membership_batch(R, g)) == [in_region(r, g) for r in rs]


def test_catalog_records():
    cat = catalog()
    assert len(cat) == 29
    assert {"id", "family", "inequality"} <= set(cat[0])
    assert len({c["id"] for c in cat}) == 29
    assert cat[0]["inequality"].endswith("<= n4")
