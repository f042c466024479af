"""Command line entry point: ``thzsim run|sweep|coverage|validate``."""

import argparse
import csv
import os
import sys
from pathlib import Path

from .channel import Channel, coverage_grid, write_coverage_csv
from .config import ConfigError, RunConfig, format_config, parse_config
from .scenario import build_plant
from .simulation import Simulation
from .sweep import (N_VALUES, P_VALUES, Point, ResultsWriter, grid_points, preset_points,
                    read_results, run_points)

EXIT_OK, EXIT_CONFIG, EXIT_RUN = 0, 2, 3
PRESETS = ("success", "cases", "payload")


def _ints(text):
    return tuple(int(t) for t in text.split(","))


def _words(text):
    return tuple(t.strip() for t in text.split(","))


def load_config(args, protocol_default=None):
    if args.config:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    else:
        if protocol_default is None:
            raise ConfigError("--config is required (run.protocol is mandatory)")
        cfg = RunConfig(protocol=protocol_default)
    changes = {}
    if getattr(args, "seed_base", None) is not None:
        changes["seed_base"] = args.seed_base
    if getattr(args, "runs", None) is not None:
        changes["runs"] = args.runs
    if getattr(args, "sim_time", None) is not None:
        changes["sim_time_s"] = args.sim_time
    try:
        return cfg.with_(**changes) if changes else cfg
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def write_trace(sim, path):
    rows = sorted(sim.trace, key=lambda r: r[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_ps", "node", "event", "packet_id", "verdict"])
        w.writerows(rows)


def _execute(base, points, seeds, out, workers, trace_dir=None):
    """Run the sweep into ``out``; returns an exit code."""
    with ResultsWriter(out) as writer:
        if trace_dir is not None:
            os.makedirs(trace_dir, exist_ok=True)
            for pt in points:
                cfg = pt.apply(base)
                try:
                    results = []
                    for s in seeds:
                        sim = Simulation(cfg, s, trace=True)
                        results.append(sim.run())
                        write_trace(sim, Path(trace_dir) / f"trace_{cfg.protocol}_N{pt.n_ues}"
                                    f"_seed{s}.csv")
                except Exception as exc:  # noqa: BLE001
                    writer.write_failure(pt, f"{type(exc).__name__}: {exc}")
                    print(f"run failed at {pt}: {exc}", file=sys.stderr)
                    return EXIT_RUN
                writer.write_point(results)
            return EXIT_OK
        it = run_points(base, points, seeds, workers)
        done = 0
        while True:
            try:
                pt, results = next(it)
            except StopIteration:
                return EXIT_OK
            except Exception as exc:  # noqa: BLE001
                pt = points[done]
                writer.write_failure(pt, f"{type(exc).__name__}: {exc}")
                print(f"run failed at {pt}: {exc}", file=sys.stderr)
                return EXIT_RUN
            writer.write_point(results)
            done += 1


def _report(out, plot_dir, preset):
    from .plotting import render_report
    os.makedirs(plot_dir, exist_ok=True)
    for path in render_report(read_results(out), plot_dir, preset):
        print(f"wrote {path}")


def cmd_validate(args):
    cfg = load_config(args)
    sys.stdout.write(format_config(cfg))
    return EXIT_OK


def cmd_run(args):
    cfg = load_config(args)
    sc = cfg.scenario
    point = Point(cfg.protocol, sc.mobility, sc.n_ues, cfg.mac.data_bytes, cfg.mac.queue_size)
    code = _execute(cfg, [point], cfg.seeds(), args.out, 1, args.trace)
    if code == EXIT_OK and args.plot:
        _report(args.out, args.plot, None)
    return code


def cmd_sweep(args):
    base = load_config(args, protocol_default="tb")
    if args.preset:
        points = preset_points(args.preset)
    else:
        sc = base.scenario
        points = grid_points(
            _words(args.protocols) if args.protocols else (base.protocol,),
            _words(args.mobility) if args.mobility else (sc.mobility,),
            _ints(args.n) if args.n else (sc.n_ues,),
            _ints(args.payload) if args.payload else (base.mac.data_bytes,),
            _ints(args.queue) if args.queue else (base.mac.queue_size,),
        )
    try:
        for pt in points:
            pt.apply(base)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    code = _execute(base, points, base.seeds(), args.out, args.workers, args.trace)
    if code == EXIT_OK and args.plot:
        _report(args.out, args.plot, args.preset)
    return code


def cmd_coverage(args):
    cfg = load_config(args, protocol_default="tb")
    plant = build_plant(cfg.scenario.machines, cfg.scenario.plant_dims)
    channel = Channel(plant, cfg.radio)
    grid = coverage_grid(channel, args.resolution, args.height)
    write_coverage_csv(grid, args.out)
    print(f"wrote {args.out} ({len(grid.xs)} x {len(grid.ys)} cells)")
    if args.plot:
        from .plotting import plot_coverage
        plot_coverage(grid, args.plot, cfg.radio.snr_th_db, plant.machines)
        print(f"wrote {args.plot}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="thzsim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default="results.csv"):
        sp.add_argument("--config", help="sectioned key = value config file")
        sp.add_argument("--seed-base", type=int, help="first seed (overrides run.seed_base)")
        sp.add_argument("--runs", type=int, help="seeds per point (overrides run.runs)")
        sp.add_argument("--sim-time", type=float, help="simulated seconds per run")
        sp.add_argument("--out", default=out_default, help="output CSV path")

    sp = sub.add_parser("validate", help="parse a config and print it with defaults filled in")
    sp.add_argument("--config", required=True)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("run", help="run one configuration over its seeds")
    common(sp)
    sp.add_argument("--trace", metavar="DIR", help="write one event trace CSV per run here")
    sp.add_argument("--plot", metavar="DIR", help="also render report figures here")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run a grid of configurations")
    common(sp)
    sp.add_argument("--preset", choices=PRESETS, help="named experiment grid")
    sp.add_argument("--protocols", help="comma list of ualoha,tl,tb")
    sp.add_argument("--mobility", help="comma list of static,dynamic")
    sp.add_argument("--n", help=f"comma list of UE counts, e.g. {','.join(map(str, N_VALUES))}")
    sp.add_argument("--payload", help=f"comma list of DATA sizes in bytes, e.g. "
                                      f"{','.join(map(str, P_VALUES))}")
    sp.add_argument("--queue", help="comma list of queue sizes Q")
    sp.add_argument("--workers", type=int, default=1, help="worker processes")
    sp.add_argument("--trace", metavar="DIR", help="write one event trace CSV per run here")
    sp.add_argument("--plot", metavar="DIR", help="also render report figures here")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("coverage", help="uplink SNR raster of the plant")
    sp.add_argument("--config")
    sp.add_argument("--resolution", type=float, default=0.25, help="cell size in meters")
    sp.add_argument("--height", type=float, default=1.5, help="UE height in meters")
    sp.add_argument("--out", default="coverage.csv")
    sp.add_argument("--plot", metavar="PNG", help="also render a heatmap")
    sp.set_defaults(func=cmd_coverage)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
