import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from relay4.model import (NODES, RATE_KEYS, STREAMS, ChannelConfig, GainVector, RateTuple,
                          canonicalize, stream_name)
from relay4.region import all_conditions, check, evaluate

gains_st = st.lists(st.integers(0, 9), min_size=4, max_size=4)
rates_st = st.lists(st.integers(0, 5), min_size=12, max_size=12).map(lambda v: RateTuple(tuple(v)))


def test_stream_order():
    assert len(STREAMS) == 12
    assert [stream_name(s) for s in STREAMS][:3] == ["R12", "R13", "R14"]
    assert RATE_KEYS[-1] == "r43"


def test_rate_tuple_rejects_negative_and_wrong_length():
    with pytest.raises(ValueError, match="r21"):
        RateTuple((0, 0, 0, -1) + (0,) * 8)
    with pytest.raises(ValueError):
        RateTuple((0,) * 11)


def test_from_mapping_accepts_several_key_styles():
    r = RateTuple.from_mapping({"r12": 2, "34": 1, (4, 3): 5})
    assert r[(1, 2)] == 2 and r[(3, 4)] == 1 and r[(4, 3)] == 5
    assert RateTuple.from_mapping(r.as_dict()) == r


def test_channel_config_q_is_max_gain():
    assert ChannelConfig(GainVector((7, 6, 5, 4))).q == 7
    assert ChannelConfig(GainVector((0, 0, 0, 0))).q == 0


def test_canonicalize_moves_stream_with_its_endpoints():
    # node 2 holds gain 7 (canonical 1), node 1 holds gain 4 (canonical 4)
    r = RateTuple.from_mapping({(2, 1): 3})
    g, rc, rl = canonicalize((4, 7, 5, 6), r)
    assert tuple(g) == (7, 6, 5, 4)
    assert rl.to_canonical == (4, 1, 3, 2)
    assert rc == RateTuple.from_mapping({(1, 4): 3})
    assert rl.rates_to_original(rc) == r
    assert rl.gains_to_original(g) == GainVector((4, 7, 5, 6))


def test_sorted_gains_give_identity():
    r = RateTuple(tuple(range(12)))
    g, rc, rl = canonicalize((7, 6, 5, 4), r)
    assert rl.is_identity and rc == r


def test_ties_keep_index_order():
    _, _, rl = canonicalize((5, 5, 5, 5), RateTuple.zeros())
    assert rl.is_identity
    _, _, rl = canonicalize((3, 5, 3, 5), RateTuple.zeros())
    assert rl.to_canonical == (3, 1, 4, 2)


def test_negative_gain_rejected():
    with pytest.raises(ValueError):
        canonicalize((1, -1, 0, 0), RateTuple.zeros())


@given(gains_st, rates_st)
def test_canonicalize_idempotent(gains, r):
    g1, r1, _ = canonicalize(gains, r)
    g2, r2, rl2 = canonicalize(g1, r1)
    assert (g1, r1) == (g2, r2) and rl2.is_identity
    assert g1.is_canonical


@given(gains_st, rates_st)
def test_relabeling_round_trips(gains, r):
    g, rc, rl = canonicalize(gains, r)
    assert rl.rates_to_original(rc) == r
    assert sorted(rl.to_canonical) == list(NODES)
    assert tuple(rl.gains_to_original(g)) == tuple(gains)


def _relabel_pairs(n: int, seed: int):
    rng = random.Random(seed)
    for _ in range(n):
        gains = [rng.randint(0, 6) for _ in range(4)]
        r = RateTuple(tuple(rng.randint(0, 3) for _ in range(12)))
        perm = list(NODES)
        rng.shuffle(perm)
        # node o of the first instance becomes node perm[o-1] of the second
        g2 = [0] * 4
        for o, p in zip(NODES, perm):
            g2[p - 1] = gains[o - 1]
        r2 = RateTuple.from_mapping({(perm[u - 1], perm[v - 1]): x for (u, v), x in r.items()})
        yield gains, r, g2, r2


def test_relabel_invariance_on_random_instances():
    """Any relabeling of the original instance gives the same verdicts; with
    distinct gains it gives the same canonical instance, hence identical gaps."""
    for gains, r, g2, r2 in _relabel_pairs(1000, seed=11):
        ga, ra, _ = canonicalize(gains, r)
        gb, rb, _ = canonicalize(g2, r2)
        assert ga == gb
        a, b = check(ra, ga), check(rb, gb)
        assert (a.in_region, a.sos_feasible) == (b.in_region, b.sos_feasible)
        if len(set(gains)) == 4:
            assert ra == rb
            assert [evaluate(c, ra, ga).gap for c in all_conditions()] == \
                   [evaluate(c, rb, gb).gap for c in all_conditions()]
