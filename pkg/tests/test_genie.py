import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from relay4.genie import (CutSpec, Phase, all_bounds, bound_matrix, equivalence_check, generate_bound,
                          iter_box)
from relay4.model import GainVector, RateTuple
from relay4.sweep import RegionSampler

G = GainVector((7, 6, 5, 4))
rates_st = st.lists(st.integers(0, 4), min_size=12, max_size=12).map(lambda v: RateTuple(tuple(v)))


def cut(phase, order):
    return CutSpec(phase, frozenset(order), tuple(order))


def test_downlink_pair_cut():
    b = generate_bound(cut(Phase.DOWNLINK, (1, 2)), G)
    assert sorted(b.streams) == sorted([(3, 1), (4, 1), (3, 2), (4, 2), (2, 1)])
    assert b.bound == 7


def test_relay_cut():
    b = generate_bound(cut(Phase.DOWNLINK, (1, 2, 3, 4)), G)
    assert sorted(b.streams) == sorted([(4, 1), (4, 2), (4, 3), (3, 1), (3, 2), (2, 1)])
    assert b.bound == 7 and b.cut.is_relay_cut


def test_uplink_singleton_is_two_sided():
    b = generate_bound(cut(Phase.UPLINK, (3,)), G)
    assert sorted(b.streams) == [(3, 1), (3, 2), (3, 4)]
    assert b.bound == 5


def test_rejects_bad_cuts():
    with pytest.raises(ValueError):
        CutSpec(Phase.UPLINK, frozenset(), ())
    with pytest.raises(ValueError):
        CutSpec(Phase.UPLINK, frozenset({1, 2}), (1, 3))


def test_bound_counts():
    bounds = all_bounds(G)
    relay = [b for b in bounds if b.cut.is_relay_cut]
    single = [b for b in bounds if len(b.cut.side) == 1]
    assert len(relay) == 24 and len(single) == 8
    assert len({b.key() for b in bounds}) == len(bounds)


def test_relay_bounds_are_the_same_in_both_phases():
    for order in itertools.permutations((1, 2, 3, 4)):
        up = generate_bound(cut(Phase.UPLINK, order), G)
        down = generate_bound(cut(Phase.DOWNLINK, order), G)
        assert up.key() == down.key()


@given(rates_st)
def test_max_over_orders_gives_max_pair(r):
    for phase in Phase:
        for i, j in itertools.combinations((1, 2, 3, 4), 2):
            b1 = generate_bound(cut(phase, (i, j)), G)
            b2 = generate_bound(cut(phase, (j, i)), G)
            cross = sum(r[s] for s in b1.streams if s not in ((i, j), (j, i)))
            assert max(b1.lhs(r), b2.lhs(r)) == cross + max(r[(i, j)], r[(j, i)])


@given(rates_st)
def test_one_sided_at_least_as_tight(r):
    for b in all_bounds(G):
        side = b.cut.side
        two_sided = sum(r[s] for s in b.streams if not (s[0] in side and s[1] in side))
        assert two_sided <= b.lhs(r)


def test_singleton_implied_by_pair_cuts():
    bounds = all_bounds(G)
    big = [b for b in bounds if len(b.cut.side) >= 2]
    s3 = [b for b in bounds if b.cut.side == frozenset({3})]
    R = RegionSampler(G, 5).propose(20_000)
    A, rhs = bound_matrix(big)
    ok = np.all(R @ A.T <= rhs, axis=1)
    A3, rhs3 = bound_matrix(s3)
    assert np.all(np.all(R[ok] @ A3.T <= rhs3, axis=1))


def test_zero_tuple_member_under_both():
    rep = equivalence_check(G, [RateTuple.zeros()])
    assert rep.equivalent and rep.members == 1


def test_equivalence_exhaustive_small():
    g = GainVector((2, 1, 1, 1))
    total = 0
    for chunk in iter_box(g, 1):
        rep = equivalence_check(g, chunk)
        assert rep.equivalent, rep.disagreements[:3]
        total += rep.examined
    assert total == 3 ** 12  # every stream capped at min gain 1, plus one


def test_equivalence_sampled_at_reference_gains():
    _, drawn = RegionSampler(G, 1).sample(2000)
    rep = equivalence_check(G, drawn)
    assert rep.equivalent and rep.members >= 2000
