"""Success probability, network throughput and average latency."""

import math
import statistics

from .engine import ps_to_seconds


class KpiAccumulator:
    """Per-UE tallies collected while a run executes.

    Packet ids are ``(origin, seq)`` tuples. Latencies are kept in
    picoseconds and converted on output.
    """

    def __init__(self, ue_ids):
        self.ue_ids = list(ue_ids)
        self.transmitted = {j: set() for j in self.ue_ids}
        self.received = {j: 0 for j in self.ue_ids}
        self.latencies = {j: [] for j in self.ue_ids}
        self.generated_at = {}
        self.resolved = set()
        self.discarded = set()
        self.accepted_hops = []
        self.n_r = 0
        self.bs_duplicates = 0

    def on_generated(self, pid, now):
        self.generated_at[pid] = now

    def on_transmitted(self, pid):
        self.transmitted[pid[0]].add(pid)

    def _record_latency(self, pid, done_at):
        if pid in self.resolved or pid in self.discarded:
            return
        self.resolved.add(pid)
        self.latencies[pid[0]].append(done_at - self.generated_at[pid])

    def on_bs_accept(self, pid, hops, now, ack_delay):
        """First copy of ``pid`` at the BS; ``ack_delay`` is T_ACK plus the ACK's flight time."""
        self.n_r += 1
        self.received[pid[0]] += 1
        self.accepted_hops.append(hops)
        self._record_latency(pid, now + ack_delay)

    def on_bs_duplicate(self, pid):
        self.bs_duplicates += 1

    def on_origin_resolved(self, pid, now):
        self._record_latency(pid, now)

    def on_discard(self, pid):
        self.discarded.add(pid)

    def n_tx(self, j):
        return len(self.transmitted[j])

    @property
    def discarded_count(self):
        return len(self.discarded)


def success_probability(acc):
    ratios = []
    for j in acc.ue_ids:
        n_tx = acc.n_tx(j)
        if n_tx == 0:
            raise ValueError(f"UE {j} never transmitted")
        ratios.append(acc.received[j] / n_tx)
    return sum(ratios) / len(ratios)


def network_throughput(acc, data_bytes, sim_time_s):
    if sim_time_s <= 0:
        raise ValueError("simulation time must be positive")
    return 8 * data_bytes * acc.n_r / sim_time_s


def average_latency(acc):
    """Mean over UEs of each UE's mean packet latency, in seconds.

    UEs without a single acknowledged packet (e.g. unconnected single-hop
    UEs) have no defined mean and are left out; NaN if no UE qualifies.
    """
    per_ue = [sum(s) / len(s) for s in acc.latencies.values() if s]
    if not per_ue:
        return math.nan
    return ps_to_seconds(sum(per_ue) / len(per_ue))


def mean_std(values):
    values = [v for v in values if not math.isnan(v)]
    if not values:
        return math.nan, math.nan
    if len(values) == 1:
        return values[0], 0.0
    return statistics.fmean(values), statistics.stdev(values)
