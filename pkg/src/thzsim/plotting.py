"""Static report figures drawn from the results and coverage CSVs."""

import math
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

LABELS = {"ualoha": "UALOHA", "tl": "TL", "tb": "TB"}


def _case(row):
    name = LABELS.get(row["protocol"], row["protocol"])
    return name if row["protocol"] == "ualoha" else f"{name}, {row['mobility']}"


def _series(rows, x, y, group):
    """{group: (xs, means, stds)} from the aggregate rows."""
    mean = defaultdict(dict)
    std = defaultdict(dict)
    for row in rows:
        if row["seed"] == "mean":
            mean[group(row)][row[x]] = row[y]
        elif row["seed"] == "std":
            std[group(row)][row[x]] = row[y]
    out = {}
    for g, pts in mean.items():
        xs = sorted(pts)
        out[g] = (xs, [pts[v] for v in xs], [std[g].get(v, 0.0) for v in xs])
    return out


def plot_metric(rows, x, y, path, xlabel, ylabel, scale=1.0, group=_case):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for g, (xs, ms, ss) in sorted(_series(rows, x, y, group).items()):
        ms = [m * scale for m in ms]
        ss = [0.0 if math.isnan(s) else s * scale for s in ss]
        ax.errorbar(xs, ms, yerr=ss, marker="o", capsize=3, label=g)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_success(rows, path):
    return plot_metric(rows, "N", "p_s", path, "number of UEs N", "success probability $p_s$")


def plot_throughput(rows, path):
    return plot_metric(rows, "N", "S_bps", path, "number of UEs N", "S [Gbit/s]", scale=1e-9)


def plot_latency(rows, path):
    return plot_metric(rows, "N", "L_avg_s", path, "number of UEs N", "average latency [ns]",
                       scale=1e9)


def plot_payload(rows, path):
    def group(row):
        return f"{LABELS.get(row['protocol'], row['protocol'])}, Q={row['Q']}"
    return plot_metric(rows, "P_bytes", "S_bps", path, "DATA size P [bytes]", "S [Gbit/s]",
                       scale=1e-9, group=group)


def plot_coverage(grid, path, threshold_db=7.0, machines=()):
    fig, ax = plt.subplots(figsize=(7.0, 4.8))
    extent = (grid.xs[0], grid.xs[-1], grid.ys[0], grid.ys[-1])
    im = ax.imshow(np.asarray(grid.snr_db), origin="lower", extent=extent, cmap="viridis",
                   aspect="equal")
    ax.contour(grid.xs, grid.ys, grid.snr_db, levels=[threshold_db], colors="w",
               linewidths=0.8)
    for m in machines:
        lo = m.lo
        ax.add_patch(plt.Rectangle((lo[0], lo[1]), m.side, m.side, fill=False, ec="r", lw=0.8))
    fig.colorbar(im, ax=ax, label="uplink SNR [dB]")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


REPORTS = {
    "success": (("success", plot_success),),
    "cases": (("throughput", plot_throughput), ("latency", plot_latency)),
    "payload": (("payload", plot_payload),),
}


def render_report(rows, out_dir, preset=None):
    """Write the figures matching ``preset`` (or all N-based ones) into ``out_dir``."""
    kinds = REPORTS.get(preset) or (("success", plot_success), ("throughput", plot_throughput),
                                    ("latency", plot_latency))
    paths = []
    for name, fn in kinds:
        paths.append(fn(rows, f"{out_dir}/{preset or 'sweep'}_{name}.png"))
    return paths
