"""Unslotted-Aloha MAC with full-buffer traffic and the multi-hop listening extension.

UE cycle: BACKOFF -> TX (one burst with every queued DATA) -> WAIT -> BACKOFF.
In the multi-hop modes the radio listens during BACKOFF and WAIT, relays
DATA it overhears and acknowledges it: immediately in BACKOFF, at the end of
the phase in WAIT.
"""

from collections import deque
from dataclasses import dataclass

from .engine import EventKind
from .phy import IDLE, RECEIVING
from .routing import (BROADCAST, BS_ID, TB, TL, UALOHA, BsDedup, NeighborTable,
                      select_destination_tb, select_destination_tl)

DATA = "DATA"
ACK = "ACK"

BACKOFF = "BACKOFF"
TX = "TX"
WAIT = "WAIT"


WAIT_POLICIES = ("own", "all")


class FsmError(RuntimeError):
    """An event reached a node in a state that has no transition for it."""


@dataclass(frozen=True)
class MacParams:
    contention: int = 5          # C
    max_attempts: int = 3        # R
    max_hops: int = 4            # H
    queue_size: int = 5          # Q
    data_bytes: int = 20         # P
    ack_bytes: int = 10          # P_A
    backoff_slot_ps: int = 1600  # T_BO
    ttl: int = 3
    # WAIT ends early on the ACK of the node's own DATA ("own") or only once
    # every DATA of the burst is acknowledged ("all").
    wait_for: str = "all"

    def __post_init__(self):
        for name in ("contention", "max_attempts", "max_hops", "queue_size", "data_bytes",
                     "ack_bytes", "backoff_slot_ps", "ttl"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.wait_for not in WAIT_POLICIES:
            raise ValueError(f"wait_for must be one of {WAIT_POLICIES}, got {self.wait_for!r}")


class MacTiming:
    """Durations in picoseconds derived from the radio and MAC parameters."""

    def __init__(self, params, airtime, max_prop_delay):
        self.slot = params.backoff_slot_ps
        self.contention = params.contention
        self.t_data = airtime.data
        self.t_ack = airtime.ack
        self.tau_max = max_prop_delay
        self.t_wait = self.t_ack + 2 * self.tau_max

    def window(self, attempt):
        return 2 ** attempt * self.contention

    def backoff(self, xi, multihop):
        base = self.slot * xi
        return base + self.t_data + self.tau_max if multihop else base


class Packet:
    """DATA or ACK frame. ``id`` is the DATA id, or that of the DATA an ACK confirms."""

    __slots__ = ("kind", "origin", "seq", "hops", "sender", "dest", "has_bs", "is_ack", "id")

    def __init__(self, kind, origin, seq, hops, sender, dest, has_bs=False):
        self.kind = kind
        self.origin = origin
        self.seq = seq
        self.hops = hops
        self.sender = sender
        self.dest = dest
        self.has_bs = has_bs
        self.is_ack = kind == ACK
        self.id = (origin, seq)

    @property
    def label(self):
        return f"{'A' if self.kind == ACK else 'D'}{self.origin}.{self.seq}"

    def __repr__(self):
        to = "*" if self.dest is BROADCAST else self.dest
        return f"<{self.label} {self.sender}->{to} hops={self.hops}>"


class QueueEntry:
    __slots__ = ("pid", "hops", "attempts", "own")

    def __init__(self, pid, hops, own):
        self.pid = pid
        self.hops = hops
        self.attempts = 1
        self.own = own


class UeMac:
    def __init__(self, node_id, sim, mode, rng):
        if mode not in (UALOHA, TL, TB):
            raise ValueError(f"unknown routing mode {mode!r}")
        self.id = node_id
        self.sim = sim
        self.mode = mode
        self.rng = rng
        self.params = sim.mac
        self.timing = sim.timing
        self.multihop = mode != UALOHA
        self._bo_mode = RECEIVING if self.multihop else IDLE
        self._bo_offset = self.timing.backoff(0, self.multihop)
        self.capacity = self.params.queue_size if self.multihop else 1
        self.table = NeighborTable(self.params.ttl) if mode == TB else None
        self.queue = []
        self.in_queue = {}
        self.own = None
        self.seq = 0
        self.state = None
        self.transmitting = False
        self.ack_queue = deque()
        self.deferred_acks = []
        self.burst = deque()
        self.outstanding = {}
        self.burst_pending = False
        self.acked_by = set()
        self.wake_at = None
        self.wait_event = None
        self.relay_drops = 0

    # -- queue ---------------------------------------------------------------

    def _generate_own(self):
        self.seq += 1
        entry = QueueEntry((self.id, self.seq), 0, own=True)
        self.own = entry
        self._enqueue(entry)
        self.sim.acc.on_generated(entry.pid, self.sim.scheduler.now)

    def _enqueue(self, entry):
        self.queue.append(entry)
        self.in_queue[entry.pid] = entry

    def _dequeue(self, entry):
        self.queue.remove(entry)
        del self.in_queue[entry.pid]

    # -- radio ---------------------------------------------------------------

    def _rest_mode(self):
        if self.state == BACKOFF and not self.multihop:
            return IDLE
        return RECEIVING

    def _transmit(self, packet):
        self.transmitting = True
        self.sim.medium.broadcast_transmission(self.id, packet)

    def _next_transmission(self):
        if self.ack_queue:
            return self.ack_queue.popleft()
        if self.state == TX:
            if self.burst:
                return self.burst.popleft()
            self._enter_wait()
            return None
        if self.burst_pending:
            self.burst_pending = False
            self._begin_burst()
            return self.burst.popleft()
        return None

    def _ack_on_hold(self):
        # An ACK never cuts into a reception already under way; the burst does.
        return (self.state != TX and not self.burst_pending and bool(self.ack_queue)
                and self.sim.medium.receiving_until(self.id) > 0)

    def _kick(self):
        if self.transmitting:
            return
        if not self.ack_queue and not self.burst_pending and self.state != TX:
            return
        if self._ack_on_hold():
            self.sim.wake_when_clear(self)
            return
        packet = self._next_transmission()
        if packet is not None:
            self._transmit(packet)

    def on_channel_clear(self):
        self.wake_at = None
        self._kick()

    def on_tx_end(self):
        if not self.transmitting:
            raise FsmError(f"UE {self.id}: TX_END without a transmission")
        self.transmitting = False
        if self._ack_on_hold():
            self.sim.wake_when_clear(self)
            packet = None
        else:
            packet = self._next_transmission()
        if packet is None:
            self.sim.medium.end_transmission(self.id, self._rest_mode())
        else:
            self.sim.medium.end_transmission(self.id, RECEIVING)
            self._transmit(packet)

    # -- FSM -----------------------------------------------------------------

    def start(self):
        self._generate_own()
        self.start_backoff()

    def start_backoff(self):
        if not self.queue:
            raise FsmError(f"UE {self.id}: backoff with an empty queue")
        self.state = BACKOFF
        attempt = self.own.attempts
        timing = self.timing
        # window() and backoff() inlined; this runs once per cycle of every UE
        xi = self.rng.randint(1, timing.contention << attempt)
        t_b = timing.slot * xi + self._bo_offset
        sim = self.sim
        if sim.record:
            sim.on_backoff_drawn(self.id, attempt, xi, t_b)
        sim.scheduler.schedule(sim.scheduler.now + t_b, EventKind.BACKOFF_EXPIRY, self.id)
        if not self.transmitting:
            sim.medium.set_mode(self.id, self._bo_mode)
            self._kick()
        return t_b

    def on_backoff_expiry(self):
        if self.state != BACKOFF:
            raise FsmError(f"UE {self.id}: BACKOFF_EXPIRY in state {self.state}")
        if self.transmitting or self.ack_queue:
            # ACKs owed go first, back-to-back, then the burst.
            self.burst_pending = True
            self._kick()
            return
        self._begin_burst()
        self._transmit(self.burst.popleft())

    def _destination(self):
        if self.mode == TL:
            return select_destination_tl(self)
        if self.mode == TB:
            return select_destination_tb(self.table)
        return BS_ID

    def _begin_burst(self):
        self.state = TX
        self.outstanding = {}
        self.acked_by = set()
        acc = self.sim.acc
        dest = self._destination()  # one next hop for the whole burst
        for entry in self.queue:
            self.outstanding[entry.pid] = dest
            if entry.own:
                acc.on_transmitted(entry.pid)
            self.burst.append(Packet(DATA, entry.pid[0], entry.pid[1], entry.hops,
                                     self.id, dest))

    def _enter_wait(self):
        self.state = WAIT
        sched = self.sim.scheduler
        self.wait_event = sched.schedule(sched.now + self.timing.t_wait, EventKind.WAIT_EXPIRY,
                                         self.id)

    def on_wait_expiry(self):
        if self.state != WAIT:
            raise FsmError(f"UE {self.id}: WAIT_EXPIRY in state {self.state}")
        self._close_wait()

    def _close_wait(self):
        """Charge one failed attempt to every DATA of the burst still unacknowledged."""
        missed = set()
        for pid, dest in self.outstanding.items():
            entry = self.in_queue[pid]
            entry.attempts += 1
            if dest is not BROADCAST:
                missed.add(dest)
        if self.table is not None:
            # A neighbor that acknowledged anything during this WAIT did not miss.
            for dest in sorted(missed - self.acked_by):
                self.table.update_on_timeout(dest)
        for pid in list(self.outstanding):
            entry = self.in_queue[pid]
            if entry.attempts > self.params.max_attempts:
                self._dequeue(entry)
                if entry.own:
                    self.sim.acc.on_discard(pid)
                    self.own = None
                else:
                    self.relay_drops += 1
        self._end_wait()

    def _end_wait(self):
        self.wait_event = None
        self.outstanding = {}
        self.acked_by = set()
        self.ack_queue.extend(self.deferred_acks)
        self.deferred_acks.clear()
        if self.own is None:
            # the next own packet is generated when the cycle restarts
            self._generate_own()
        self.start_backoff()

    # -- receptions ----------------------------------------------------------

    def _resolve(self, entry):
        self._dequeue(entry)
        if entry.own:
            self.sim.acc.on_origin_resolved(entry.pid, self.sim.scheduler.now)
            self.own = None
            if self.state != WAIT:
                self._generate_own()

    def on_ack(self, packet, snr_db):
        if packet.dest != self.id:
            return
        if self.state not in (BACKOFF, WAIT):
            raise FsmError(f"UE {self.id}: ACK delivered in state {self.state}")
        if self.table is not None:
            self.table.update_on_ack(packet.sender, snr_db, packet.has_bs)
        self.acked_by.add(packet.sender)
        entry = self.in_queue.get(packet.id)
        if entry is None:
            return
        self._resolve(entry)
        if self.state == WAIT and packet.id in self.outstanding:
            del self.outstanding[packet.id]
            if not self.outstanding or (entry.own and self.params.wait_for == "own"):
                self.sim.scheduler.cancel(self.wait_event)
                self._close_wait()

    def accepts(self, packet):
        """Relay admission: 'accept', 'duplicate' (ACK only) or None (silent drop)."""
        if packet.origin == self.id:
            return None
        if packet.hops + 1 > self.params.max_hops:
            return None
        if packet.id in self.in_queue:
            return "duplicate"
        # An own packet waiting to be regenerated keeps its slot.
        if len(self.queue) + (self.own is None) >= self.capacity:
            return None
        return "accept"

    def on_data(self, packet, snr_db):
        if not self.multihop:
            return
        if packet.dest is not BROADCAST and packet.dest != self.id:
            return
        if self.state not in (BACKOFF, WAIT):
            raise FsmError(f"UE {self.id}: DATA delivered in state {self.state}")
        verdict = self.accepts(packet)
        if verdict is None:
            return
        if verdict == "accept":
            self._enqueue(QueueEntry(packet.id, packet.hops + 1, own=False))
            self.sim.on_relay_accept(self.id, packet.hops + 1)
        has_bs = self.table.has_bs if self.table is not None else False
        ack = Packet(ACK, packet.origin, packet.seq, 0, self.id, packet.sender, has_bs)
        if self.state == BACKOFF:
            self.ack_queue.append(ack)
            self._kick()
        else:
            self.deferred_acks.append(ack)


class BaseStation:
    """Always-listening sink: acknowledges every DATA addressed to it."""

    def __init__(self, sim):
        self.id = BS_ID
        self.sim = sim
        self.dedup = BsDedup()
        self.ack_queue = deque()
        self.transmitting = False
        self.wake_at = None

    def on_data(self, packet, snr_db):
        if packet.dest is not BROADCAST and packet.dest != BS_ID:
            return
        sim = self.sim
        if self.dedup.accept(packet.id):
            ack_delay = sim.timing.t_ack + sim.delay(BS_ID, packet.sender)
            sim.acc.on_bs_accept(packet.id, packet.hops, sim.scheduler.now, ack_delay)
        else:
            sim.acc.on_bs_duplicate(packet.id)
        self.ack_queue.append(Packet(ACK, packet.origin, packet.seq, 0, BS_ID, packet.sender,
                                     True))
        self._kick()

    def on_ack(self, packet, snr_db):
        pass

    def _kick(self):
        if self.transmitting or not self.ack_queue:
            return
        if self.sim.medium.receiving_until(BS_ID):
            # Wait for the end of the reception under way, e.g. the rest of a burst.
            self.sim.wake_when_clear(self)
            return
        self.transmitting = True
        self.sim.medium.broadcast_transmission(BS_ID, self.ack_queue.popleft())

    def on_channel_clear(self):
        self.wake_at = None
        self._kick()

    def on_tx_end(self):
        self.sim.medium.end_transmission(BS_ID, RECEIVING)
        self.transmitting = False
        self._kick()
