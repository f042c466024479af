import pytest
from hypothesis import given
from hypothesis import strategies as st

from thzsim.routing import (BROADCAST, BS_ID, BsDedup, NeighborTable, select_destination_tb,
                            select_destination_tl)


def test_tl_always_broadcast():
    assert select_destination_tl() is BROADCAST
    assert select_destination_tl(object()) is BROADCAST


def test_empty_table_means_discovery():
    assert select_destination_tb(NeighborTable()) is BROADCAST


def test_bs_in_table_wins():
    t = NeighborTable()
    t.update_on_ack(4, 30.0, True)
    t.update_on_ack(4, 30.0, True)
    t.update_on_ack(BS_ID, 8.0, True)
    assert select_destination_tb(t) == BS_ID


def test_has_bs_beats_ack_count_and_snr():
    t = NeighborTable()
    for _ in range(3):
        t.update_on_ack(1, 10.0, True)      # A
    for _ in range(5):
        t.update_on_ack(2, 15.0, False)     # B
    assert t.best().node == 1
    assert select_destination_tb(t) == 1


def test_ties_broken_by_acks_then_snr_then_id():
    t = NeighborTable()
    t.update_on_ack(5, 10.0, True)
    t.update_on_ack(3, 12.0, True)
    assert t.best().node == 3               # higher SNR
    t.update_on_ack(5, 10.0, True)
    assert t.best().node == 5               # more ACKs
    t.update_on_ack(3, 10.0, True)
    assert t.best().node == 3               # all equal: lower id


def test_no_route_to_bs_falls_back_to_discovery():
    t = NeighborTable()
    t.update_on_ack(2, 15.0, False)
    assert select_destination_tb(t) is BROADCAST


def test_ack_updates():
    t = NeighborTable()
    e = t.update_on_ack(3, 12.0, False)
    assert (e.node, e.ack_count, e.last_snr, e.miss_count, e.has_bs) == (3, 1, 12.0, 0, False)
    e = t.update_on_ack(3, 9.0, True)
    assert (e.ack_count, e.last_snr, e.has_bs) == (2, 9.0, True)
    # the flag follows the latest ACK
    assert t.update_on_ack(3, 9.0, False).has_bs is False
    assert t.update_on_ack(BS_ID, 9.0, False).has_bs is True


def test_ttl_eviction_and_reset():
    t = NeighborTable(ttl=3)
    t.update_on_ack(5, 10.0, True)
    t.update_on_timeout(5)
    t.update_on_timeout(5)
    assert 5 in t and t.entries[5].miss_count == 2
    t.update_on_ack(5, 10.0, True)
    assert t.entries[5].miss_count == 0
    for _ in range(3):
        t.update_on_timeout(5)
    assert 5 not in t and len(t) == 0
    assert select_destination_tb(t) is BROADCAST
    assert t.update_on_timeout(42) is None


@given(st.lists(st.sampled_from(["ack", "miss"]), max_size=40))
def test_eviction_after_exactly_ttl_consecutive_misses(events):
    t = NeighborTable(ttl=3)
    present, run = False, 0
    for ev in events:
        if ev == "ack":
            t.update_on_ack(7, 10.0, True)
            present, run = True, 0
        else:
            t.update_on_timeout(7)
            if present:
                run += 1
                if run == 3:
                    present, run = False, 0
        assert (7 in t) == present
        if present:
            assert t.entries[7].miss_count == run


def test_bs_dedup():
    d = BsDedup()
    assert d.accept((1, 1)) is True
    assert d.accept((1, 1)) is False
    assert d.accept((2, 1)) is True
    assert d.seen == {(1, 1), (2, 1)}
