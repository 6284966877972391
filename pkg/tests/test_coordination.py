import numpy as np
import pytest

from radiostripes import SystemConfig, draw_scenario
from radiostripes.coordination import (
    COMPRESSED_SIGNAL,
    SIDE_INFO,
    overhead_per_link,
    overhead_report,
    run_protocol,
)
from radiostripes.inp import run_stripe


@pytest.fixture(scope="module")
def tiny():
    cfg = SystemConfig(M=2, L=3, N=4, K=2, C_F=6.0)
    return cfg, draw_scenario(cfg, np.random.default_rng(2))


def test_message_counts(tiny):
    cfg, scen = tiny
    _, trace = run_protocol(scen.states[0], cfg.Sigma_x, cfg.C_F)
    si = trace.side_info_messages()
    assert trace.hops == 3
    assert [m.payload_reals for m in si] == [8, 8, 8]
    assert trace.overhead_reals_total == 24
    assert [m.receiver for m in si] == [(0, 1), (0, 2), (0, 3)]
    assert sum(m.kind == COMPRESSED_SIGNAL for m in trace.messages) == 3


@pytest.mark.parametrize("scheme", ["mmse-opt", "mrc-opt", "mmse-naive", "mrc-naive"])
def test_protocol_equals_monolithic_run(tiny, scheme):
    cfg, scen = tiny
    combiner, quantizer = scheme.split("-")
    for m, row in enumerate(scen.states):
        got, _ = run_protocol(row, cfg.Sigma_x, cfg.C_F, combiner, quantizer, stripe=m)
        want, _ = run_stripe(row, cfg.Sigma_x, cfg.C_F, combiner, quantizer, stripe=m)
        for a, b in zip(got, want):
            np.testing.assert_array_equal(a.U, b.U)
            np.testing.assert_array_equal(a.Omega, b.Omega)
            np.testing.assert_array_equal(a.side_info_out.G_hat, b.side_info_out.G_hat)
            np.testing.assert_array_equal(a.side_info_out.Sigma_e, b.side_info_out.Sigma_e)


def test_causality(tiny):
    cfg, scen = tiny
    _, trace = run_protocol(scen.states[1], cfg.Sigma_x, cfg.C_F, stripe=1)
    si = trace.side_info_messages()
    times = [m.time for m in si]
    assert all(b > a for a, b in zip(times, times[1:]))
    for msg in si:
        assert msg.receiver == (msg.sender[0], msg.sender[1] + 1)
        # the payload was produced by the sender, never by a later AP
        assert msg.payload is not None


def test_stripe_traces_independent_of_order(tiny):
    cfg, scen = tiny
    fwd = [run_protocol(row, cfg.Sigma_x, cfg.C_F, stripe=m)[1] for m, row in enumerate(scen.states)]
    rev = [run_protocol(scen.states[m], cfg.Sigma_x, cfg.C_F, stripe=m)[1] for m in (1, 0)][::-1]
    for a, b in zip(fwd, rev):
        assert [(m.sender, m.kind, m.time) for m in a.messages] == \
               [(m.sender, m.kind, m.time) for m in b.messages]


def test_overhead_per_link():
    assert overhead_per_link("mmse", "opt", 20) == 800
    assert overhead_per_link("mrc", "naive", 20) == 800
    assert overhead_per_link("mrc", "opt", 4) == 32
    assert overhead_per_link("mrc", "none", 20) == 0


def test_overhead_report(tiny):
    cfg, scen = tiny
    traces = {}
    for scheme in ("mmse-opt", "mrc-naive"):
        c, q = scheme.split("-")
        traces[scheme] = [run_protocol(row, cfg.Sigma_x, cfg.C_F, c, q, stripe=m)[1]
                          for m, row in enumerate(scen.states)]
    rows = {r["scheme"]: r for r in overhead_report(traces)}
    assert rows["mmse-opt"]["per_link"] == 2 * cfg.K**2
    assert rows["mmse-opt"]["total"] == cfg.M * cfg.L * 2 * cfg.K**2
    assert rows["mrc-naive"]["links"] == cfg.M * cfg.L
