"""Seeded experiment sweeps and the results CSV."""

import csv
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .metrics import mean_std
from .simulation import run_once

CSV_COLUMNS = ("protocol", "mobility", "N", "P_bytes", "Q", "seed", "p_s", "S_bps",
               "L_avg_s", "N_R", "discarded")
N_VALUES = (4, 6, 8, 10, 12)
P_VALUES = (20, 40, 60, 80, 100)


@dataclass(frozen=True)
class Point:
    """One sweep coordinate; ``None`` keeps the base config's value."""

    protocol: str
    mobility: str = "static"
    n_ues: int = 4
    data_bytes: int = 20
    queue_size: int = 5

    def apply(self, base):
        return base.with_(protocol=self.protocol, mobility=self.mobility, n_ues=self.n_ues,
                          data_bytes=self.data_bytes, queue_size=self.queue_size)


def preset_points(name):
    if name == "success":
        return [Point(p, "static", n) for p in ("ualoha", "tb", "tl") for n in N_VALUES]
    if name == "cases":
        return [Point(p, m, n) for p, m in itertools.product(("tl", "tb"), ("static", "dynamic"))
                for n in N_VALUES]
    if name == "payload":
        return [Point(p, "static", 12, size, q) for p in ("tl", "tb") for q in (5, 9)
                for size in P_VALUES]
    raise ValueError(f"unknown preset {name!r}; expected success, cases or payload")


def grid_points(protocols, mobilities=("static",), n_values=(4,), payloads=(20,), queues=(5,)):
    return [Point(p, m, n, size, q) for p, m, n, size, q
            in itertools.product(protocols, mobilities, n_values, payloads, queues)]


def _job(args):
    config, seed = args
    return run_once(config, seed)


def run_points(base, points, seeds, workers=1):
    """Run every (point, seed) pair; yields ``(point, [RunResult, ...])`` in point order."""
    configs = [pt.apply(base) for pt in points]
    jobs = [(cfg, s) for cfg in configs for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = pool.map(_job, jobs)
            for pt in points:
                yield pt, [next(flat) for _ in seeds]
    else:
        it = iter(jobs)
        for pt in points:
            yield pt, [_job(next(it)) for _ in seeds]


def _num(x):
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(x)


def result_row(r):
    return [r.protocol, r.mobility, r.n, r.data_bytes, r.queue_size, r.seed, _num(r.p_s),
            _num(r.throughput_bps), _num(r.latency_s), r.n_r, r.discarded]


def aggregate(results):
    """Mean and sample std rows over the runs of one point (``seed`` = mean / std)."""
    first = results[0]
    key = [first.protocol, first.mobility, first.n, first.data_bytes, first.queue_size]
    stats = [mean_std([getattr(r, f) for r in results])
             for f in ("p_s", "throughput_bps", "latency_s", "n_r", "discarded")]
    mean = key + ["mean"] + [_num(float(m)) for m, _ in stats]
    std = key + ["std"] + [_num(float(s)) for _, s in stats]
    return mean, std


def failure_row(point, message):
    return [point.protocol, point.mobility, point.n_ues, point.data_bytes, point.queue_size,
            "FAILED", "", "", "", "", message]


class ResultsWriter:
    """Streams rows to the results CSV and flushes after every point."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(CSV_COLUMNS)

    def write_point(self, results):
        for r in results:
            self._w.writerow(result_row(r))
        for row in aggregate(results):
            self._w.writerow(row)
        self._fh.flush()

    def write_failure(self, point, message):
        self._w.writerow(failure_row(point, message))
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_results(path):
    """Rows of a results CSV as dicts with numeric fields converted."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["seed"] == "FAILED":
                continue
            for k in ("N", "P_bytes", "Q"):
                row[k] = int(row[k])
            for k in ("p_s", "S_bps", "L_avg_s", "N_R", "discarded"):
                row[k] = float(row[k])
            rows.append(row)
    return rows
