"""
The stripe as a message-passing protocol
========================================

Each AP is an agent holding only its own channel estimates. It acts when
the side information from its predecessor arrives, then sends its own side
information and compressed signal one hop downstream.
"""

import numpy as np

from radiostripes import SystemConfig, draw_scenario
from radiostripes.coordination import overhead_report, run_protocol
from radiostripes.inp import run_stripe

cfg = SystemConfig(M=2, L=3, N=4, K=2, C_F=6.0)
scen = draw_scenario(cfg, np.random.default_rng(0))

###############################################################################
# The message log of stripe 0.

results, trace = run_protocol(scen.states[0], cfg.Sigma_x, cfg.C_F)
for msg in trace.messages:
    print(f"t={msg.time}  {msg.sender} -> {msg.receiver}  {msg.kind:17s} {msg.payload_reals} reals")

###############################################################################
# The agents reproduce the direct recursion bit for bit.

direct, _ = run_stripe(scen.states[0], cfg.Sigma_x, cfg.C_F)
print("\nidentical:", all(np.array_equal(a.Omega, b.Omega) for a, b in zip(results, direct)))

###############################################################################
# Signaling overhead per scheme: ``2 K^2`` reals per link whenever an AP
# needs upstream statistics.

traces = {}
for scheme in ("mmse-opt", "mrc-naive"):
    c, q = scheme.split("-")
    traces[scheme] = [run_protocol(row, cfg.Sigma_x, cfg.C_F, c, q, stripe=m)[1]
                      for m, row in enumerate(scen.states)]
for row in overhead_report(traces):
    print(row)
