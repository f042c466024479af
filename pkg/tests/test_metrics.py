import math

import pytest

from thzsim.metrics import (KpiAccumulator, average_latency, mean_std, network_throughput,
                            success_probability)


def test_success_probability_is_mean_of_ratios():
    acc = KpiAccumulator([1, 2])
    for s in range(4):
        acc.on_transmitted((1, s))
    acc.on_transmitted((2, 0))
    acc.on_transmitted((2, 0))  # retransmission of the same packet
    acc.received[1] = 1
    acc.received[2] = 1
    assert acc.n_tx(2) == 1
    assert success_probability(acc) == pytest.approx((1 / 4 + 1) / 2)


def test_success_probability_requires_traffic():
    with pytest.raises(ValueError):
        success_probability(KpiAccumulator([1]))


def test_throughput():
    acc = KpiAccumulator([1])
    assert network_throughput(acc, 20, 0.5e-3) == 0.0
    acc.n_r = 10_000
    assert network_throughput(acc, 20, 0.5e-3) == pytest.approx(3.2e9)
    with pytest.raises(ValueError):
        network_throughput(acc, 20, 0.0)


def test_latency_first_resolution_wins_and_discards_excluded():
    acc = KpiAccumulator([1, 2, 3])
    acc.on_generated((1, 1), 0)
    acc.on_bs_accept((1, 1), 0, 1000, 1600 + 50)
    acc.on_origin_resolved((1, 1), 5000)          # later, ignored
    acc.on_generated((2, 1), 100)
    acc.on_origin_resolved((2, 1), 900)
    acc.on_generated((2, 2), 1000)
    acc.on_discard((2, 2))
    acc.on_bs_accept((2, 2), 1, 4000, 1600)       # discarded at origin: no sample
    assert acc.latencies == {1: [2650], 2: [800], 3: []}
    assert acc.n_r == 2 and acc.received == {1: 1, 2: 1, 3: 0}
    assert average_latency(acc) == pytest.approx((2650 + 800) / 2 * 1e-12)
    assert math.isnan(average_latency(KpiAccumulator([1])))


def test_mean_std():
    m, s = mean_std([1.0, 2.0, 3.0])
    assert (m, s) == (2.0, 1.0)
    assert mean_std([4.0]) == (4.0, 0.0)
    assert mean_std([float("nan"), 2.0, 4.0])[0] == 3.0
    assert all(math.isnan(v) for v in mean_std([]))
