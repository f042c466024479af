"""One simulation run: placement, nodes, event loop and KPI extraction."""

from dataclasses import dataclass

from .channel import BS, UE, Channel, prop_delay
from .engine import EventKind, Scheduler, make_stream, ps_to_seconds, seconds_to_ps
from .mac import BaseStation, FsmError, MacTiming, UeMac
from .metrics import KpiAccumulator, average_latency, network_throughput, success_probability
from .phy import DELIVERED, Airtime, Medium
from .routing import UALOHA
from .scenario import build_plant, distance, mobility_epoch, place_ues


@dataclass
class RunResult:
    protocol: str
    mobility: str
    n: int
    data_bytes: int
    queue_size: int
    seed: int
    p_s: float
    throughput_bps: float
    latency_s: float
    n_r: int
    discarded: int


class Simulation:
    """A single seeded run of one configuration.

    ``trace=True`` keeps the PHY event trace (``self.trace``), ``record=True``
    keeps backoff draws and relay admissions for property checks.
    """

    def __init__(self, config, seed, trace=False, record=False, placement=None):
        self.config = config
        self.seed = seed
        sc = config.scenario
        self.plant = build_plant(sc.machines, sc.plant_dims)
        self.channel = Channel(self.plant, config.radio)
        self.mac = config.mac
        self.protocol = config.protocol
        self.scheduler = Scheduler()
        self.sim_time = seconds_to_ps(config.sim_time_s)

        if placement is None:
            placement = place_ues(self.plant, sc.n_ues, make_stream(seed, "placement"),
                                  self.channel, relay_reachable=sc.relay_reachable)
        self.placement = placement
        self.n = placement.n

        airtime = Airtime(config.radio, self.mac.data_bytes, self.mac.ack_bytes)
        self.timing = MacTiming(self.mac, airtime, self.channel.max_prop_delay)
        self.trace = [] if trace else None
        self.medium = Medium(self.scheduler, self.n + 1, airtime, config.radio.snr_th_db,
                             trace=self.trace, relevant=self._relevant)
        self.acc = KpiAccumulator(range(1, self.n + 1))
        self.record = record
        self.backoff_log = []
        self.relay_log = []
        self.link_log = []

        self.bs = BaseStation(self)
        self.nodes = [self.bs] + [
            UeMac(j, self, self.protocol, make_stream(seed, f"backoff/{j}"))
            for j in range(1, self.n + 1)]
        self._build_handlers()
        self._update_links()
        self._mobility_rng = make_stream(seed, "mobility")

    @property
    def now(self):
        return self.scheduler.now

    def positions(self):
        return [self.placement.bs_pos] + list(self.placement.ue_pos)

    def _update_links(self):
        pos = self.positions()
        kinds = [BS] + [UE] * self.n
        size = len(pos)
        self._delay = [[prop_delay(distance(pos[a], pos[b])) for b in range(size)]
                       for a in range(size)]
        links = []
        for a in range(size):
            row = {}
            for b in range(size):
                if a == b:
                    continue
                lb = self.channel.link_budget(pos[a], pos[b], kinds[a], kinds[b])
                if lb.decodable:
                    row[b] = (lb.prop_delay, lb.snr_db)
            links.append(row)
        self.links = links
        self.medium.set_links(links)
        if self.record:
            self.link_log.append((self.now, [dict(r) for r in links]))

    def _relevant(self, packet):
        """Receivers that could act on ``packet``; None means every one of them.

        Other arrivals only matter as interference.
        """
        dest = packet.dest
        if dest is not None:
            return (dest,)
        if packet.is_ack or self.protocol == UALOHA:
            return (0,)
        return None

    def wake_when_clear(self, node):
        """Schedule ``node.on_channel_clear`` for the end of the reception under way."""
        until = self.medium.receiving_until(node.id)
        if node.wake_at != until:
            node.wake_at = until
            self.scheduler.schedule(until, EventKind.CHANNEL_CLEAR, node.id)

    def delay(self, a, b):
        return self._delay[a][b]

    # -- hooks used by the MAC ---------------------------------------------

    def on_backoff_drawn(self, node, attempt, xi, t_b):
        if self.record:
            self.backoff_log.append((self.now, node, attempt, xi, t_b))

    def on_relay_accept(self, node, hops):
        if self.record:
            self.relay_log.append((self.now, node, hops))

    # -- event loop ----------------------------------------------------------

    def _dispatch(self, ev):
        self._handlers[ev.kind](ev)

    @staticmethod
    def _unhandled(ev):
        raise FsmError(f"no handler for {ev!r}")

    def _on_arrival_end(self, ev):
        arrival = ev.payload
        if self.medium.resolve(arrival) == DELIVERED:
            node = self.nodes[arrival.rx]
            if arrival.packet.is_ack:
                node.on_ack(arrival.packet, arrival.snr_db)
            else:
                node.on_data(arrival.packet, arrival.snr_db)

    def _build_handlers(self):
        # Indexed by kind: Enum hashing is slow enough to show up here.
        nodes = self.nodes
        table = {
            EventKind.ARRIVAL_END: self._on_arrival_end,
            EventKind.TX_END: lambda ev: nodes[ev.target].on_tx_end(),
            EventKind.BACKOFF_EXPIRY: lambda ev: nodes[ev.target].on_backoff_expiry(),
            EventKind.WAIT_EXPIRY: lambda ev: nodes[ev.target].on_wait_expiry(),
            EventKind.CHANNEL_CLEAR: lambda ev: nodes[ev.target].on_channel_clear(),
            EventKind.MOBILITY_EPOCH: lambda ev: self._mobility_epoch(),
            EventKind.SIM_END: lambda ev: None,
        }
        self._handlers = [table.get(k) or self._unhandled for k in range(max(EventKind) + 1)]
        self.scheduler.handler = self._handlers

    def _mobility_epoch(self):
        sc = self.config.scenario
        self.placement = mobility_epoch(self.placement, self.plant, self._mobility_rng,
                                        sc.p_move)
        self._update_links()
        nxt = self.now + self.move_period
        if nxt < self.sim_time:
            self.scheduler.schedule(nxt, EventKind.MOBILITY_EPOCH)

    @property
    def move_period(self):
        sc = self.config.scenario
        t_move = sc.t_move_s if sc.t_move_s is not None else self.config.sim_time_s / 10
        return seconds_to_ps(t_move)

    def run(self):
        for node in self.nodes[1:]:
            node.start()
        if self.config.scenario.mobility == "dynamic" and self.move_period < self.sim_time:
            self.scheduler.schedule(self.move_period, EventKind.MOBILITY_EPOCH)
        self.scheduler.schedule(self.sim_time, EventKind.SIM_END)
        self.scheduler.run_until(self.sim_time)
        return self.result()

    def result(self):
        acc = self.acc
        return RunResult(
            protocol=self.protocol,
            mobility=self.config.scenario.mobility,
            n=self.n,
            data_bytes=self.mac.data_bytes,
            queue_size=self.mac.queue_size,
            seed=self.seed,
            p_s=success_probability(acc),
            throughput_bps=network_throughput(acc, self.mac.data_bytes,
                                              ps_to_seconds(self.sim_time)),
            latency_s=average_latency(acc),
            n_r=acc.n_r,
            discarded=acc.discarded_count,
        )


def run_once(config, seed, **kwargs):
    return Simulation(config, seed, **kwargs).run()
