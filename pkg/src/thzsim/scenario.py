"""Plant geometry, UE placement and line-of-sight classification."""

import math
from dataclasses import dataclass, field, replace

PLANT_DIMS = (52.36, 35.4, 8.5)

# TR 38.901 InF: clutter ratio below 40 % is "sparse".
SPARSE_CLUTTER_LIMIT = 0.4
PLACEMENT_BUDGET = 100_000


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class Machine:
    """Cube resting on the floor, described by its floor center and side."""

    x: float
    y: float
    side: float

    @property
    def lo(self):
        h = self.side / 2
        return (self.x - h, self.y - h, 0.0)

    @property
    def hi(self):
        h = self.side / 2
        return (self.x + h, self.y + h, self.side)

    @property
    def footprint(self):
        return self.side * self.side

    def contains(self, p):
        lo, hi = self.lo, self.hi
        return all(lo[k] <= p[k] <= hi[k] for k in range(3))

    def overlaps(self, other):
        a_lo, a_hi, b_lo, b_hi = self.lo, self.hi, other.lo, other.hi
        return all(a_lo[k] < b_hi[k] and b_lo[k] < a_hi[k] for k in range(2))


@dataclass(frozen=True)
class Plant:
    dims: tuple = PLANT_DIMS
    machines: tuple = ()

    @property
    def floor_area(self):
        return self.dims[0] * self.dims[1]

    @property
    def clutter_ratio(self):
        return sum(m.footprint for m in self.machines) / self.floor_area

    @property
    def clutter(self):
        return "sparse" if self.clutter_ratio < SPARSE_CLUTTER_LIMIT else "dense"

    @property
    def clutter_height(self):
        return max((m.side for m in self.machines), default=0.0)

    @property
    def diagonal(self):
        return math.sqrt(sum(d * d for d in self.dims))

    @property
    def bs_position(self):
        return (self.dims[0] / 2, self.dims[1] / 2, self.dims[2])

    def machine_index(self, p):
        for k, m in enumerate(self.machines):
            if m.contains(p):
                return k
        return None

    def contains(self, p):
        return all(0.0 <= p[k] <= self.dims[k] for k in range(3))


# Four large and four small machines on a ring around the BS, alternating in
# size. Each one straddles the uplink coverage edge, so connected and
# unconnected UEs share machines, while neighbouring machines are mostly out
# of UE-to-UE range of each other.
DEFAULT_MACHINES = (
    ((37.18, 17.7), 4.0),
    ((33.6, 25.12), 2.0),
    ((26.18, 28.7), 4.0),
    ((18.76, 25.12), 2.0),
    ((15.18, 17.7), 4.0),
    ((18.76, 10.28), 2.0),
    ((26.18, 6.7), 4.0),
    ((33.6, 10.28), 2.0),
)


def build_plant(machine_spec=DEFAULT_MACHINES, dims=PLANT_DIMS):
    """Validate a machine list ``[((x, y), side), ...]`` and build the plant."""
    machines = []
    for (center, side) in machine_spec:
        x, y = center
        if not side > 0:
            raise ConfigurationError(f"machine at ({x}, {y}) has non-positive side {side}")
        m = Machine(float(x), float(y), float(side))
        lo, hi = m.lo, m.hi
        if lo[0] < 0 or lo[1] < 0 or hi[0] > dims[0] or hi[1] > dims[1] or hi[2] > dims[2]:
            raise ConfigurationError(f"machine at ({x}, {y}) side {side} leaves the plant")
        for other in machines:
            if m.overlaps(other):
                raise ConfigurationError(
                    f"machine at ({x}, {y}) overlaps machine at ({other.x}, {other.y})")
        machines.append(m)
    plant = Plant(tuple(float(d) for d in dims), tuple(machines))
    if plant.clutter != "sparse":
        raise ConfigurationError(
            f"clutter ratio {plant.clutter_ratio:.3f} is dense; only sparse clutter is modeled")
    return plant


def segment_hits_box(a, b, lo, hi):
    """True when the segment a-b passes through the interior of the box.

    Slab clipping: the parametric overlap of the segment with the box must
    have positive length; grazing a face or an edge does not count.
    """
    t0, t1 = 0.0, 1.0
    for k in range(3):
        d = b[k] - a[k]
        if d == 0.0:
            if not lo[k] < a[k] < hi[k]:
                return False
            continue
        ta = (lo[k] - a[k]) / d
        tb = (hi[k] - a[k]) / d
        if ta > tb:
            ta, tb = tb, ta
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
        if t0 >= t1:
            return False
    return True


@dataclass(frozen=True)
class LinkClass:
    los: bool
    height_class: str  # "low" | "high"
    clutter: str = "sparse"


def classify_link(a, b, plant):
    if any(m.contains(a) and m.contains(b) for m in plant.machines):
        los = False
    else:
        los = not any(segment_hits_box(a, b, m.lo, m.hi) for m in plant.machines)
    h = plant.clutter_height
    height = "high" if (a[2] > h or b[2] > h) else "low"
    return LinkClass(los, height, plant.clutter)


@dataclass(frozen=True)
class NodePlacement:
    bs_pos: tuple
    ue_pos: tuple
    containing_machine: tuple = field(default=())

    @property
    def n(self):
        return len(self.ue_pos)


def _point_in_machine(machine, rng):
    lo, hi = machine.lo, machine.hi
    return tuple(rng.uniform(lo[k], hi[k]) for k in range(3))


def _draw_ue(plant, rng):
    k = rng.randrange(len(plant.machines))
    return _point_in_machine(plant.machines[k], rng), k


def _relay_reachable(points, connected, channel):
    return all(c or any(connected[k] and channel.peer_decodable(p, points[k])
                        for k in range(len(points)))
               for p, c in zip(points, connected))


def place_ues(plant, n, rng, channel, budget=PLACEMENT_BUDGET, relay_reachable=True):
    """Rejection-sample N UEs inside machines so that exactly half reach the BS.

    With ``relay_reachable`` every unconnected UE must also decode at least
    one connected UE, i.e. the network is fully connected over two hops.
    """
    if n < 2 or n % 2:
        raise ConfigurationError(f"number of UEs must be even and >= 2, got {n}")
    if not plant.machines:
        raise ConfigurationError("UEs are placed inside machines; the plant has none")
    target = n // 2
    for _ in range(budget):
        drawn = [_draw_ue(plant, rng) for _ in range(n)]
        points = [p for p, _ in drawn]
        connected = [channel.uplink_decodable(p) for p in points]
        if sum(connected) != target:
            continue
        if not relay_reachable or _relay_reachable(points, connected, channel):
            return NodePlacement(plant.bs_position,
                                 tuple(p for p, _ in drawn),
                                 tuple(k for _, k in drawn))
    raise ConfigurationError(
        f"no placement of {n} UEs with {target} connected"
        f"{' and relay-reachable' if relay_reachable else ''} found in {budget} attempts")


def mobility_epoch(placement, plant, rng, p_move):
    """Teleport each UE, with probability ``p_move``, into a random machine."""
    pos = list(placement.ue_pos)
    idx = list(placement.containing_machine)
    for j in range(len(pos)):
        # Always consume both draws so the stream does not depend on outcomes.
        move = rng.random() < p_move
        new_pos, k = _draw_ue(plant, rng)
        if move:
            pos[j], idx[j] = new_pos, k
    return replace(placement, ue_pos=tuple(pos), containing_machine=tuple(idx))


def distance(a, b):
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)
