import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thzsim.config import ConfigError, RunConfig, format_config, parse_config


def test_defaults_match_parameter_table():
    cfg = parse_config("[run]\nprotocol = tb\n")
    m = cfg.mac
    assert (m.contention, m.max_attempts, m.max_hops, m.ack_bytes, m.data_bytes) == (5, 3, 4, 10, 20)
    assert (m.queue_size, m.ttl, m.backoff_slot_ps) == (5, 3, 1600)
    assert cfg.runs == 20 and cfg.sim_time_s == 0.5e-3
    assert cfg.radio.snr_th_db == 7.0 and cfg.radio.f_c_ghz == 100.0
    assert cfg == RunConfig(protocol="tb")


def test_queue_nine_accepted_and_comments_ignored():
    cfg = parse_config("# sweep point\n[mac]\nqueue_size = 9  # larger queue\n[run]\nprotocol = tl\n")
    assert cfg.mac.queue_size == 9 and cfg.protocol == "tl"


@pytest.mark.parametrize("text, match, line", [
    ("[run]\nprotocol =\n", "run.protocol", 2),
    ("[scenario]\nn_ues = 4\n", "run.protocol", None),
    ("[run]\nprotocol = csma\n", "unknown protocol", 2),
    ("[run]\nprotocol = tb\n[mac]\nfoo = 1\n", "unknown key mac.foo", 4),
    ("[radio2]\n", "unknown section", 1),
    ("[run]\nprotocol = tb\n[scenario]\nn_ues = 5\n", "even", 4),
    ("[run]\nprotocol = tb\n[scenario]\nn_ues = four\n", "bad value", 4),
    ("[run]\nprotocol = tb\n[scenario]\np_move = 1.5\n", "p_move", 4),
    ("[run]\nprotocol = tb\n[mac]\nwait_for = some\n", "wait_for", None),
    ("protocol = tb\n", "outside", 1),
    ("[run]\nprotocol tb\n", "key = value", 2),
    ("[run]\nprotocol = tb\n[scenario]\nmachines = 1:1:4\n", "leaves", 4),
])
def test_errors_are_descriptive(text, match, line):
    with pytest.raises(ConfigError, match=match) as err:
        parse_config(text)
    if line is not None:
        assert err.value.line == line


def test_round_trip_defaults_and_overrides():
    cfg = RunConfig(protocol="tl").with_(n_ues=10, mobility="dynamic", t_move_s=2e-5,
                                         queue_size=9, data_bytes=60, seed_base=11,
                                         relay_reachable=False)
    text = format_config(cfg)
    assert parse_config(text) == cfg
    assert "[scenario]" in text and "n_ues = 10" in text


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=-50, max_value=50, allow_nan=False),
       st.floats(min_value=1e-7, max_value=1e-2, allow_nan=False),
       st.integers(min_value=1, max_value=50), st.sampled_from(["ualoha", "tl", "tb"]))
def test_round_trip_is_bit_exact(snr, t_s, runs, proto):
    cfg = RunConfig(protocol=proto).with_(sim_time_s=t_s, runs=runs)
    cfg = cfg.with_(radio=type(cfg.radio)(snr_th_db=snr))
    assert parse_config(format_config(cfg)) == cfg


def test_seeds():
    assert RunConfig(protocol="tb", seed_base=5, runs=3).seeds() == [5, 6, 7]
