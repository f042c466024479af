"""Shared medium: per-receiver arrival intervals, half-duplex radios, collisions.

Every transmission is heard by all nodes whose isolated SNR clears the
decoding threshold, delayed by the per-link propagation delay. An arrival is
delivered only when its receiver listened over the whole closed interval
``[start, end]`` and no other arrival touched that interval (no capture).
"""

from .engine import PS_PER_S, EventKind

ARRIVAL_END = EventKind.ARRIVAL_END

DELIVERED = "Delivered"
LOST_COLLISION = "LostCollision"
LOST_BUSY = "LostBusy"
LOST_NOT_LISTENING = "LostNotListening"

IDLE = "Idle"
RECEIVING = "Receiving"
TRANSMITTING = "Transmitting"


class Airtime:
    def __init__(self, radio, data_bytes, ack_bytes):
        self.bit_rate = radio.bit_rate
        self.data = self._duration(data_bytes)
        self.ack = self._duration(ack_bytes)

    def _duration(self, size_bytes):
        return int(round(8 * size_bytes * PS_PER_S / self.bit_rate))

    def of(self, packet):
        return self.ack if packet.is_ack else self.data


class Arrival:
    __slots__ = ("tx_id", "packet", "tx", "rx", "tx_start", "start", "end", "snr_db",
                 "verdict")

    def __init__(self, tx_id, packet, tx, rx, tx_start, start, end, snr_db):
        self.tx_id = tx_id
        self.packet = packet
        self.tx = tx
        self.rx = rx
        self.tx_start = tx_start
        self.start = start
        self.end = end
        self.snr_db = snr_db
        self.verdict = None

    def overlaps(self, other):
        return self.start <= other.end and other.start <= self.end

    def __repr__(self):
        return f"Arrival(tx{self.tx_id} {self.tx}->{self.rx} [{self.start}, {self.end}])"


class RadioState:
    """Half-duplex radio with a short history of non-listening intervals.

    ``history`` holds ``[start, end, mode]`` for every period in which the
    radio was transmitting or idle; ``end`` is ``None`` while idle is open.
    """

    __slots__ = ("mode", "busy_until", "history")

    def __init__(self, mode=RECEIVING):
        self.mode = mode
        self.busy_until = 0
        self.history = []

    def switch(self, now, mode, until=None):
        """Move to ``mode``; returns +1 when an idle period opens, -1 when one closes."""
        edge = 0
        if self.mode == IDLE and mode != IDLE:
            self.history[-1][1] = now
            edge = -1
        elif mode == IDLE and self.mode != IDLE:
            self.history.append([now, None, IDLE])
            edge = 1
        if mode == TRANSMITTING:
            self.busy_until = until
            self.history.append([now, until, TRANSMITTING])
        self.mode = mode
        return edge

    def verdict_over(self, start, end):
        """Loss verdict caused by the radio itself over ``[start, end]``, or None."""
        idle = False
        for s, e, mode in self.history:
            if s <= end and (e is None or start <= e):
                if mode == TRANSMITTING:
                    return LOST_BUSY
                idle = True
        return LOST_NOT_LISTENING if idle else None

    def prune(self, before):
        h = self.history
        k = 0
        while k < len(h) - 1 and h[k][1] is not None and h[k][1] < before:
            k += 1
        if k:
            del h[:k]


def resolve_arrival(arrival, rx_state, others, snr_th_db):
    """Verdict for a finished arrival given everything else heard at its receiver.

    ``others`` holds ``(start, end, tx)`` for every signal heard at the
    receiver, the arrival itself included.
    """
    start, end, tx = arrival.start, arrival.end, arrival.tx
    verdict = rx_state.verdict_over(start, end)
    if verdict is not None:
        return verdict
    for o_start, o_end, o_tx in others:
        # Back-to-back packets of one burst touch end-to-start; they are one
        # continuous emission, not interference.
        if o_tx != tx and o_start <= end and start <= o_end:
            return LOST_COLLISION
    if arrival.snr_db < snr_th_db:
        raise ValueError(f"{arrival} is below the decoding threshold and cannot be resolved")
    return DELIVERED


class Medium:
    """Propagates transmissions and resolves arrivals for every node.

    ``links[tx]`` maps each receiver that can decode ``tx`` in isolation to
    ``(prop_delay_ps, snr_db)``; weaker signals are treated as noise and do
    not interfere.
    """

    def __init__(self, scheduler, n_nodes, airtime, snr_th_db, trace=None, relevant=None):
        self.scheduler = scheduler
        # relevant(packet) -> receivers that may act on it, or None for all.
        # Other arrivals still interfere but are not resolved one by one.
        # Ignored while tracing.
        self.relevant = relevant if trace is None else None
        self.airtime = airtime
        self.snr_th_db = snr_th_db
        self.radios = [RadioState() for _ in range(n_nodes)]
        self.arrivals = [[] for _ in range(n_nodes)]
        self.set_links([{} for _ in range(n_nodes)])
        self.trace = trace
        self.horizon = max(airtime.data, airtime.ack)
        self._tx_id = 0
        self.verdicts = {DELIVERED: 0, LOST_COLLISION: 0, LOST_BUSY: 0, LOST_NOT_LISTENING: 0}

    def set_links(self, links):
        self.links = links
        # Per transmitter: (heard list of each receiver, delay). Lists are pruned in place.
        arrivals = self.arrivals
        self._fanout = [[(arrivals[rx], delay) for rx, (delay, _) in row.items()]
                        for row in links]

    def _trace_edge(self, node, edge):
        self.trace.append((self.scheduler.now, node, "IDLE_START" if edge > 0 else "IDLE_END",
                           "", ""))

    def set_mode(self, node, mode):
        """Switch a free radio between listening and idle."""
        radio = self.radios[node]
        if radio.mode == TRANSMITTING:
            raise RuntimeError(f"node {node} is transmitting")
        if radio.mode != mode:
            edge = radio.switch(self.scheduler.now, mode)
            if edge and self.trace is not None:
                self._trace_edge(node, edge)

    def end_transmission(self, node, mode):
        if mode == TRANSMITTING:
            raise ValueError("a finished transmission must settle in Idle or Receiving")
        edge = self.radios[node].switch(self.scheduler.now, mode)
        if edge and self.trace is not None:
            self._trace_edge(node, edge)

    def broadcast_transmission(self, tx, packet):
        """Put ``packet`` on the air from ``tx`` and schedule its arrivals.

        The caller settles the radio again with :meth:`end_transmission` when
        the TX_END event fires.
        """
        now = self.scheduler.now
        airtime = self.airtime
        duration = airtime.ack if packet.is_ack else airtime.data
        end = now + duration
        radio = self.radios[tx]
        if radio.mode == TRANSMITTING:
            raise RuntimeError(f"node {tx} is already transmitting")
        edge = radio.switch(now, TRANSMITTING, end)
        if edge and self.trace is not None:
            self._trace_edge(tx, edge)
        if len(radio.history) > 4:
            radio.prune(now - self.horizon)
        # Lists only shrink on resolution or when their owner transmits.
        if len(self.arrivals[tx]) > 16:
            self._prune(tx, now)
        tx_id = self._tx_id
        self._tx_id += 1
        trace = self.trace
        if trace is not None:
            pid = f"{tx_id}:{packet.label}"
            trace.append((now, tx, "TX_START", pid, ""))
            trace.append((end, tx, "TX_END", pid, ""))
        out = []
        schedule = self.scheduler.schedule
        targets = None if self.relevant is None else self.relevant(packet)
        for heard, delay in self._fanout[tx]:
            start = now + delay
            heard.append((start, start + duration, tx))
        links = self.links[tx]
        for rx in links if targets is None else targets:
            link = links.get(rx)
            if link is None:
                continue
            start = now + link[0]
            a = Arrival(tx_id, packet, tx, rx, now, start, start + duration, link[1])
            schedule(a.end, ARRIVAL_END, rx, a)
            if trace is not None:
                trace.append((start, rx, "RX_START", pid, ""))
                trace.append((a.end, rx, "RX_END", pid, ""))
            out.append(a)
        schedule(end, EventKind.TX_END, tx, packet)
        return out

    def receiving_until(self, node):
        """End of the latest arrival already under way at ``node``, or 0 if none is."""
        now = self.scheduler.now
        until = 0
        for start, end, _ in self.arrivals[node]:
            if start <= now < end and end > until:
                until = end
        return until

    def resolve(self, arrival):
        rx = arrival.rx
        now = self.scheduler.now
        pending = self.arrivals[rx]
        verdict = resolve_arrival(arrival, self.radios[rx], pending, self.snr_th_db)
        arrival.verdict = verdict
        self.verdicts[verdict] += 1
        if self.trace is not None:
            self.trace.append((arrival.end, rx, "VERDICT",
                               f"{arrival.tx_id}:{arrival.packet.label}", verdict))
        if len(pending) > 8:
            self._prune(rx, now)
        return verdict

    def _prune(self, rx, now):
        cutoff = now - self.horizon
        heard = self.arrivals[rx]
        heard[:] = [a for a in heard if a[1] >= cutoff]
        self.radios[rx].prune(cutoff)
