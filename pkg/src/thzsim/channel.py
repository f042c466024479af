"""Indoor-factory path loss, link SNR and propagation delay."""

import csv
import math
from dataclasses import dataclass, fields

import numpy as np

from .engine import PS_PER_S
from .scenario import classify_link, distance

BOLTZMANN = 1.380649e-23
SPEED_OF_LIGHT = 2.998e8
MIN_DISTANCE = 1.0

UE = "ue"
BS = "bs"


@dataclass(frozen=True)
class RadioParams:
    f_c_ghz: float = 100.0
    bandwidth_hz: float = 25e9
    modulation_order: int = 4
    p_tx_ue_dbm: float = 25.0
    p_tx_bs_dbm: float = 30.0
    eta_ue_db: float = 0.0
    eta_bs_db: float = 0.0
    g_ue_db: float = 8.0
    g_bs_db: float = 10.0
    f_ue_db: float = 9.0
    f_bs_db: float = 8.0
    t0_k: float = 290.0
    snr_th_db: float = 7.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v}")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")
        m = self.modulation_order
        if m < 2 or m & (m - 1):
            raise ValueError(f"modulation order must be a power of two, got {m}")

    @property
    def bit_rate(self):
        return self.bandwidth_hz * math.log2(self.modulation_order)

    def tx_power_dbw(self, kind):
        return (self.p_tx_bs_dbm if kind == BS else self.p_tx_ue_dbm) - 30.0

    def efficiency_db(self, kind):
        return self.eta_bs_db if kind == BS else self.eta_ue_db

    def gain_db(self, kind):
        return self.g_bs_db if kind == BS else self.g_ue_db

    def noise_figure_db(self, kind):
        return self.f_bs_db if kind == BS else self.f_ue_db


@dataclass(frozen=True)
class PathLossCoeffs:
    beta: float
    alpha: float
    gamma: float

    def evaluate(self, d, f_c_ghz):
        return self.beta + self.alpha * math.log10(d) + self.gamma * math.log10(f_c_ghz)


# 3GPP TR 38.901 Table 7.4.1-1, InF with sparse clutter.
INF_LOS = PathLossCoeffs(31.84, 21.50, 19.00)
INF_SL = PathLossCoeffs(33.0, 25.5, 20.0)
INF_SH = PathLossCoeffs(32.4, 23.0, 20.0)


def path_loss(d, link, f_c_ghz=100.0):
    """Path loss in dB; NLOS is never better than LOS at the same distance."""
    d = max(d, MIN_DISTANCE)
    pl_los = INF_LOS.evaluate(d, f_c_ghz)
    if link.los:
        return pl_los
    nlos = INF_SH if link.height_class == "high" else INF_SL
    return max(pl_los, nlos.evaluate(d, f_c_ghz))


def noise_power_dbw(noise_figure_db, radio):
    f_lin = 10 ** (noise_figure_db / 10)
    return 10 * math.log10(BOLTZMANN * radio.t0_k * f_lin * radio.bandwidth_hz)


def prop_delay(d):
    """Propagation delay over ``d`` meters, in whole picoseconds."""
    if d < 0:
        raise ValueError("negative distance")
    return int(round(d / SPEED_OF_LIGHT * PS_PER_S))


@dataclass(frozen=True)
class LinkBudget:
    pl_db: float
    snr_db: float
    prop_delay: int
    decodable: bool


class Channel:
    """Deterministic link evaluation inside a given plant."""

    def __init__(self, plant, radio=None):
        self.plant = plant
        self.radio = radio or RadioParams()
        self._noise = {k: noise_power_dbw(self.radio.noise_figure_db(k), self.radio)
                       for k in (UE, BS)}

    def noise_dbw(self, kind):
        return self._noise[kind]

    def snr_db(self, tx_pos, rx_pos, tx_kind, rx_kind, pl_db=None):
        r = self.radio
        if pl_db is None:
            link = classify_link(tx_pos, rx_pos, self.plant)
            pl_db = path_loss(distance(tx_pos, rx_pos), link, r.f_c_ghz)
        return (r.tx_power_dbw(tx_kind) + r.efficiency_db(tx_kind) + r.efficiency_db(rx_kind)
                + r.gain_db(tx_kind) + r.gain_db(rx_kind) - pl_db - self._noise[rx_kind])

    def link_budget(self, tx_pos, rx_pos, tx_kind=UE, rx_kind=UE):
        d = distance(tx_pos, rx_pos)
        link = classify_link(tx_pos, rx_pos, self.plant)
        pl = path_loss(d, link, self.radio.f_c_ghz)
        snr = self.snr_db(tx_pos, rx_pos, tx_kind, rx_kind, pl_db=pl)
        return LinkBudget(pl, snr, prop_delay(d), snr >= self.radio.snr_th_db)

    def uplink_snr(self, ue_pos):
        return self.snr_db(ue_pos, self.plant.bs_position, UE, BS)

    def uplink_decodable(self, ue_pos):
        return self.uplink_snr(ue_pos) >= self.radio.snr_th_db

    def peer_decodable(self, a, b):
        """UE-to-UE link usable in isolation (the budget is symmetric)."""
        return self.snr_db(a, b, UE, UE) >= self.radio.snr_th_db

    @property
    def max_prop_delay(self):
        return prop_delay(self.plant.diagonal)


@dataclass
class CoverageGrid:
    xs: np.ndarray
    ys: np.ndarray
    height: float
    snr_db: np.ndarray  # shape (len(ys), len(xs))

    def rows(self):
        for iy, y in enumerate(self.ys):
            for ix, x in enumerate(self.xs):
                yield float(x), float(y), float(self.snr_db[iy, ix])


def coverage_grid(channel, resolution=0.25, height=1.5):
    """Uplink SNR to the BS from a UE at every grid cell center."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    w, l, _ = channel.plant.dims
    nx = math.ceil(w / resolution - 1e-9)
    ny = math.ceil(l / resolution - 1e-9)
    xs = np.minimum((np.arange(nx) + 0.5) * resolution, w)
    ys = np.minimum((np.arange(ny) + 0.5) * resolution, l)
    snr = np.empty((ny, nx))
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            snr[iy, ix] = channel.uplink_snr((float(x), float(y), height))
    return CoverageGrid(xs, ys, height, snr)


def write_coverage_csv(grid, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_m", "y_m", "snr_db"])
        for x, y, s in grid.rows():
            w.writerow([f"{x:.4f}", f"{y:.4f}", f"{s:.6f}"])
