"""Addressing and next-hop policies: single-hop, table-less and table-based."""

from dataclasses import dataclass

UALOHA = "ualoha"
TL = "tl"
TB = "tb"
MODES = (UALOHA, TL, TB)

BROADCAST = None
BS_ID = 0


@dataclass
class NeighborEntry:
    node: int
    has_bs: bool = False
    ack_count: int = 0
    last_snr: float = float("-inf")
    miss_count: int = 0

    def rank_key(self):
        # Sorting ascending on this key puts the preferred next hop first.
        return (not self.has_bs, -self.ack_count, -self.last_snr, self.node)


class NeighborTable:
    """Per-UE table learned purely from ACKs addressed to this UE."""

    def __init__(self, ttl=3):
        self.ttl = ttl
        self.entries = {}

    def __len__(self):
        return len(self.entries)

    def __contains__(self, node):
        return node in self.entries

    @property
    def has_bs(self):
        return BS_ID in self.entries

    def update_on_ack(self, sender, snr_db, has_bs):
        e = self.entries.get(sender)
        if e is None:
            e = self.entries[sender] = NeighborEntry(sender)
        e.ack_count += 1
        e.last_snr = snr_db
        e.miss_count = 0
        e.has_bs = has_bs or sender == BS_ID
        return e

    def update_on_timeout(self, dest):
        """One more consecutive missed ACK from ``dest``; evicts at TTL."""
        e = self.entries.get(dest)
        if e is None:
            return None
        e.miss_count += 1
        if e.miss_count >= self.ttl:
            del self.entries[dest]
            return None
        return e

    def best(self):
        if not self.entries:
            return None
        if BS_ID in self.entries:
            return self.entries[BS_ID]
        return min(self.entries.values(), key=NeighborEntry.rank_key)


def select_destination_tl(node=None):
    return BROADCAST


def select_destination_tb(table):
    """Unicast to the best neighbor offering a route to the BS, else broadcast (discovery).

    A neighbor without the BS in its own table is no route at all; unicasting
    to it can only bounce the packet around, so the node rediscovers instead.
    """
    best = table.best()
    if best is None or not best.has_bs:
        return BROADCAST
    return best.node


class BsDedup:
    """Ids of DATA already accepted at the BS during this run."""

    def __init__(self):
        self.seen = set()

    def accept(self, packet_id):
        if packet_id in self.seen:
            return False
        self.seen.add(packet_id)
        return True


def bs_dedup(dedup, packet_id):
    return "accept" if dedup.accept(packet_id) else "duplicate"
