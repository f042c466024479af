import csv

import pytest

import thzsim.sweep as sweep
from thzsim.cli import main
from thzsim.sweep import CSV_COLUMNS, preset_points

SMALL = "[scenario]\nn_ues = 2\n[run]\nprotocol = {p}\nruns = 2\nsim_time_s = 1e-05\n"


@pytest.fixture
def cfg_file(tmp_path):
    def make(p="tb", extra=""):
        path = tmp_path / f"{p}.cfg"
        path.write_text(SMALL.format(p=p) + extra)
        return str(path)
    return make


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_preset_sizes():
    assert len(preset_points("success")) == 15
    assert len(preset_points("cases")) == 20
    assert len(preset_points("payload")) == 20
    assert {p.n_ues for p in preset_points("payload")} == {12}
    with pytest.raises(ValueError):
        preset_points("bogus")


def test_run_writes_rows_and_aggregates(tmp_path, cfg_file):
    out = tmp_path / "r.csv"
    assert main(["run", "--config", cfg_file(), "--out", str(out)]) == 0
    r = rows(out)
    assert tuple(r[0]) == CSV_COLUMNS
    assert [x[5] for x in r[1:]] == ["1", "2", "mean", "std"]
    assert r[1][:5] == ["tb", "static", "2", "20", "5"]


def test_same_seeds_give_byte_identical_csv(tmp_path, cfg_file):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["sweep", "--config", cfg_file("tl"), "--n", "2,4", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(rows(a)) == 1 + 2 * (2 + 2)


def test_seed_overrides(tmp_path, cfg_file):
    out = tmp_path / "r.csv"
    main(["run", "--config", cfg_file(), "--seed-base", "40", "--runs", "3", "--out", str(out)])
    assert [x[5] for x in rows(out)[1:4]] == ["40", "41", "42"]


def test_sweep_axes_and_plots(tmp_path, cfg_file):
    out, figs = tmp_path / "s.csv", tmp_path / "figs"
    code = main(["sweep", "--config", cfg_file(), "--protocols", "tb,tl", "--payload", "20,40",
                 "--queue", "5,9", "--out", str(out), "--plot", str(figs)])
    assert code == 0
    means = [x for x in rows(out)[1:] if x[5] == "mean"]
    assert len(means) == 8
    assert {(x[0], x[3], x[4]) for x in means} == {
        (p, s, q) for p in ("tb", "tl") for s in ("20", "40") for q in ("5", "9")}
    assert sorted(f.name for f in figs.iterdir()) == [
        "sweep_latency.png", "sweep_success.png", "sweep_throughput.png"]


def test_trace_files(tmp_path, cfg_file):
    out, tr = tmp_path / "r.csv", tmp_path / "tr"
    assert main(["run", "--config", cfg_file(), "--out", str(out), "--trace", str(tr)]) == 0
    files = sorted(tr.iterdir())
    assert len(files) == 2
    head = rows(files[0])
    assert head[0] == ["time_ps", "node", "event", "packet_id", "verdict"]
    times = [int(x[0]) for x in head[1:]]
    assert times == sorted(times)


def test_config_errors_exit_2(tmp_path, cfg_file, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[run]\nprotocol = zz\n")
    assert main(["validate", "--config", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert main(["run", "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["sweep", "--config", cfg_file(), "--n", "3", "--out",
                 str(tmp_path / "x.csv")]) == 2


def test_run_failure_exit_3_keeps_partial_csv(tmp_path, cfg_file, monkeypatch):
    real = sweep.run_once
    calls = []

    def flaky(cfg, seed):
        calls.append(seed)
        if len(calls) > 2:
            raise RuntimeError("boom")
        return real(cfg, seed)
    monkeypatch.setattr(sweep, "run_once", flaky)
    out = tmp_path / "s.csv"
    code = main(["sweep", "--config", cfg_file(), "--n", "2,4", "--out", str(out)])
    assert code == 3
    r = rows(out)
    assert [x[5] for x in r[1:]] == ["1", "2", "mean", "std", "FAILED"]
    assert "boom" in r[-1][-1]


def test_validate_prints_round_trippable_config(cfg_file, capsys):
    assert main(["validate", "--config", cfg_file("ualoha")]) == 0
    text = capsys.readouterr().out
    assert "protocol = ualoha" in text and "wait_for = all" in text


def test_coverage(tmp_path):
    out, png = tmp_path / "c.csv", tmp_path / "c.png"
    assert main(["coverage", "--resolution", "1.0", "--out", str(out), "--plot", str(png)]) == 0
    assert len(rows(out)) == 1 + 53 * 36
    assert png.stat().st_size > 0
