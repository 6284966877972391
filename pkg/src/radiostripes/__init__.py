"""Sequential in-network processing for cell-free massive MIMO on parallel radio stripes."""

from .config import SystemConfig, dbm_to_mw, gbps_to_bits
from .coordination import overhead_report, run_protocol
from .evaluation import (
    SCHEMES,
    RateReport,
    cutset_bound,
    evaluate,
    fronthaul_rate,
    per_ap_info,
    simulate_transmission,
    sum_rate_lb,
)
from .inp import InpStrategy, SideInfo, design, run_stripe, solve_quantizer
from .scenario import Scenario, draw_scenario

__version__ = "0.1.0"
