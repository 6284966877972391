"""Independent oracles and the acceptance checks built on them.

Each ``check_*`` function runs one acceptance criterion at its stated
tolerance and returns a :class:`CheckResult`. The CLI ``verify`` command and
the acceptance tests both call these.
"""

import itertools
import time
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig, dbm_to_mw
from .coordination import overhead_per_link, overhead_report, run_protocol
from .evaluation import fronthaul_rate, simulate_transmission
from .experiments import run_point, trial_seed
from .inp import design, kkt_stationarity, objective_bits, run_stripe, solve_quantizer
from .scenario import draw_scenario

DESK = SystemConfig(M=2, L=4, N=8, K=4, C_F=8.0)
PAPER_GAIN = 0.8292


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    values: dict = field(default_factory=dict)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:>2}. {self.name}: {self.detail} ({self.seconds:.1f}s)"


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4)
def simplex_grid(K, steps):
    """All nonnegative integer K-vectors summing to ``steps``, shape (n, K).

    Stars and bars: choosing K-1 bar positions among ``steps + K - 1`` slots
    gives every composition exactly once.
    """
    if K == 1:
        return np.array([[steps]])
    n = steps + K - 1
    bars = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(n), K - 1)),
                       dtype=np.int64).reshape(-1, K - 1)
    edges = np.hstack([np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), n)])
    out = np.diff(edges, axis=1) - 1
    out.setflags(write=False)
    return out


def grid_search_quantizer(gamma, C_F, step=1e-3):
    """Best objective over a grid of rate splits that use exactly ``C_F`` bits.

    Mode k is given ``b_k`` bits, i.e. ``a_k = (2^b_k - 1) / (gamma_k + 1)``,
    with the fractions ``b / C_F`` on a simplex grid of spacing ``step``.
    """
    gamma = np.asarray(gamma, dtype=float)
    steps = int(round(1.0 / step))
    b = simplex_grid(gamma.size, steps) * (C_F / steps)
    a = np.expm1(np.log(2.0) * b) / (gamma + 1.0)
    vals = np.sum(np.log1p(a * (gamma + 1.0)) - np.log1p(a), axis=1) / np.log(2.0)
    j = int(np.argmax(vals))
    return float(vals[j]), a[j]


def _fh_errors(strategy, Sigma_x, C_F):
    errs = []
    for row in strategy.stripes:
        for res in row:
            f = fronthaul_rate(res.G_hat, res.Sigma_e, Sigma_x, res.Omega, res.side_info_out.dead)
            errs.append(abs(f - C_F))
    return errs


def _kkt_residuals(strategy):
    res_active = []
    slack_viol = []
    for row in strategy.stripes:
        for r in row:
            if r.a is None or r.lam == 0.0:
                continue
            s = kkt_stationarity(r.a, r.gamma_eig, r.lam)
            act = r.a > 0
            res_active.extend(np.abs(s[act]))
            # inactive modes must not want bits: stationarity <= 0 at a = 0
            slack_viol.extend(np.maximum(s[~act], 0.0))
    return res_active, slack_viol


def _rates(config, schemes, trials, hybrid="off", seed=None):
    res = run_point(config, schemes, hybrid, seed=config.seed if seed is None else seed,
                    trials=trials)
    return {s: res[:, j, 0] for j, s in enumerate(schemes)}, res[:, 0, 1]


# ---------------------------------------------------------------------------
# Acceptance criteria
# ---------------------------------------------------------------------------

def check_quantizer_oracle(n_instances=200, tol=1e-3, seed=0):
    """Closed-form quantizer vs exhaustive grid over the feasible manifold."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    worst, worst_below = 0.0, 0.0
    for _ in range(n_instances):
        K = int(rng.integers(1, 4))
        gamma = rng.uniform(0, 20, K)
        C_F = rng.uniform(1, 12)
        a, _ = solve_quantizer(gamma, C_F)
        closed = objective_bits(a, gamma)
        grid, _ = grid_search_quantizer(gamma, C_F)
        worst = max(worst, abs(closed - grid))
        worst_below = max(worst_below, grid - closed)
    ok = worst <= tol and worst_below <= 1e-9
    return CheckResult(1, "quantizer oracle equivalence", ok,
                       f"max |closed - grid| = {worst:.2e} bits (tol {tol:g}); "
                       f"grid never beats closed form by more than {worst_below:.1e}",
                       time.time() - t0, {"max_gap": worst})


def _pipeline_trials(trials, seed, schemes=("mmse-opt", "mrc-opt")):
    cfg = DESK
    for t in range(trials):
        scen = draw_scenario(cfg, np.random.default_rng(trial_seed(seed, t)))
        for scheme in schemes:
            combiner, quantizer = scheme.split("-")
            yield design(scen.states, cfg.Sigma_x, cfg.C_F, combiner, quantizer)


def check_constraint_active(trials=100, tol=1e-6, seed=0):
    """f_FH = C_F at every AP of every optimized-quantizer design."""
    t0 = time.time()
    errs = []
    for strat in _pipeline_trials(trials, seed):
        errs.extend(_fh_errors(strat, DESK.Sigma_x, DESK.C_F))
    worst = max(errs)
    return CheckResult(2, "fronthaul constraint active", worst <= tol,
                       f"max |f_FH - C_F| = {worst:.2e} bits over {len(errs)} AP designs (tol {tol:g})",
                       time.time() - t0, {"max_err": worst})


def check_kkt(trials=100, tol=1e-8, seed=0):
    """Stationarity residual of active modes (and sign of inactive ones)."""
    t0 = time.time()
    act, slack = [], []
    for strat in _pipeline_trials(trials, seed):
        a, s = _kkt_residuals(strat)
        act.extend(a)
        slack.extend(s)
    worst = max(act)
    worst_slack = max(slack) if slack else 0.0
    ok = worst < tol and worst_slack < tol
    return CheckResult(3, "KKT residuals", ok,
                       f"max active residual {worst:.2e}, max inactive violation "
                       f"{worst_slack:.2e} (tol {tol:g})", time.time() - t0,
                       {"max_residual": worst})


def check_ordering(trials=200, seed=0):
    """Scheme ordering of trial means and the per-trial cutset bound."""
    t0 = time.time()
    schemes = ("mmse-opt", "mrc-opt", "mmse-naive", "mrc-naive")
    res = run_point(DESK, schemes, seed=seed, trials=trials)
    means = res[:, :, 0].mean(axis=0)
    excess = float(np.max(res[:, :, 0] - res[:, :, 1]))
    m = dict(zip(schemes, means))
    ok = (m["mmse-opt"] >= m["mrc-opt"] and m["mmse-opt"] >= m["mmse-naive"]
          and excess <= 1e-6)
    txt = ", ".join(f"{s} {v:.3f}" for s, v in m.items())
    return CheckResult(4, "scheme ordering and cutset", ok,
                       f"means [{txt}]; max(sum-rate - cutset) = {excess:.2e}",
                       time.time() - t0, m)


def check_crossover(trials=300, low=2.0, high=16.0, seed=0):
    """MRC+optFH beats MMSE+naiveFH at low C_F and loses at high C_F."""
    t0 = time.time()
    schemes = ("mrc-opt", "mmse-naive")
    lo, _ = _rates(DESK.replace(C_F=low), schemes, trials, seed=seed)
    hi, _ = _rates(DESK.replace(C_F=high), schemes, trials, seed=seed)
    a = lo["mrc-opt"].mean() > lo["mmse-naive"].mean()
    b = hi["mrc-opt"].mean() < hi["mmse-naive"].mean()
    return CheckResult(5, "low-fronthaul crossover", a and b,
                       f"C_F={low:g}: mrc-opt {lo['mrc-opt'].mean():.3f} vs mmse-naive "
                       f"{lo['mmse-naive'].mean():.3f} ({'ok' if a else 'wrong order'}); "
                       f"C_F={high:g}: mrc-opt {hi['mrc-opt'].mean():.3f} vs mmse-naive "
                       f"{hi['mmse-naive'].mean():.3f} ({'ok' if b else 'no reversal'})",
                       time.time() - t0)


def check_gain(trials=200, p_dbm=8.0, threshold=0.30, seed=0):
    """Relative gain of the proposed scheme over both single-technique baselines."""
    t0 = time.time()
    cfg = DESK.replace(P_tx=float(dbm_to_mw(p_dbm)))
    schemes = ("mmse-opt", "mrc-opt", "mmse-naive")
    r, _ = _rates(cfg, schemes, trials, seed=seed)
    m = {s: v.mean() for s, v in r.items()}
    g_mrc = m["mmse-opt"] / m["mrc-opt"] - 1
    g_naive = m["mmse-opt"] / m["mmse-naive"] - 1
    ok = min(g_mrc, g_naive) >= threshold
    return CheckResult(6, "gain at low SNR", ok,
                       f"P_tx={p_dbm:g} dBm: gain over mrc-opt {100 * g_mrc:.1f}%, over "
                       f"mmse-naive {100 * g_naive:.1f}% (need >= {100 * threshold:.0f}%; "
                       f"reference {100 * PAPER_GAIN:.2f}%)", time.time() - t0,
                       {"gain_mrc": g_mrc, "gain_naive": g_naive})


def check_monotonic(trials=100, C_values=(2.0, 6.0, 10.0), M_values=(1, 2, 4), seed=0):
    """Mean sum-rate non-decreasing in C_F and in M at fixed M * L."""
    t0 = time.time()
    total = DESK.M * DESK.L
    by_c = [_rates(DESK.replace(C_F=c), ("mmse-opt",), trials, seed=seed)[0]["mmse-opt"].mean()
            for c in C_values]
    by_m = [_rates(DESK.replace(M=m, L=total // m), ("mmse-opt",), trials,
                   seed=seed)[0]["mmse-opt"].mean() for m in M_values]
    ok = bool(np.all(np.diff(by_c) >= 0) and np.all(np.diff(by_m) >= 0))
    return CheckResult(7, "monotonicity in C_F and M", ok,
                       "C_F " + ", ".join(f"{c:g}:{v:.3f}" for c, v in zip(C_values, by_c))
                       + "; M " + ", ".join(f"{m}:{v:.3f}" for m, v in zip(M_values, by_m)),
                       time.time() - t0)


def slope_ci(x, y, z=1.96):
    """OLS slope of y on x with a normal-approximation confidence interval."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    slope = float(xc @ (y - y.mean()) / (xc @ xc))
    resid = y - y.mean() - slope * xc
    se = float(np.sqrt(resid @ resid / (x.size - 2) / (xc @ xc)))
    return slope, slope - z * se, slope + z * se


def check_hybrid(trials=100, N_values=(8, 16, 24), within=0.15, seed=0):
    """Hybrid-proposed rises with N and tracks fully digital; random stays flat."""
    t0 = time.time()
    digital, proposed, random_x, random_y = [], [], [], []
    for N in N_values:
        cfg = DESK.replace(N=N)
        digital.append(_rates(cfg, ("mmse-opt",), trials, "off", seed)[0]["mmse-opt"].mean())
        proposed.append(_rates(cfg, ("mmse-opt",), trials, "proposed", seed)[0]["mmse-opt"].mean())
        r = _rates(cfg, ("mmse-opt",), trials, "random", seed)[0]["mmse-opt"]
        random_x.extend([N] * r.size)
        random_y.extend(r)
    rises = bool(np.all(np.diff(proposed) > 0))
    gap = 1 - proposed[-1] / digital[-1]
    slope, lo, hi = slope_ci(random_x, random_y)
    flat = lo <= 0 <= hi
    ok = rises and gap <= within and flat
    return CheckResult(8, "hybrid behavior", ok,
                       "digital " + ", ".join(f"{v:.3f}" for v in digital)
                       + "; proposed " + ", ".join(f"{v:.3f}" for v in proposed)
                       + f" (gap at N={N_values[-1]}: {100 * gap:.1f}%); random slope "
                       f"{slope:.4f} per antenna, 95% CI [{lo:.4f}, {hi:.4f}]",
                       time.time() - t0)


def check_monte_carlo(n_symbols=100_000, tol=0.05, seed=0):
    """Empirical CP covariance vs analytic, and K=1 optimized vs naive quantizer."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    scen = draw_scenario(DESK, rng)
    worst = 0.0
    for scheme in ("mmse-opt", "mrc-opt", "mmse-naive"):
        combiner, quantizer = scheme.split("-")
        strat = design(scen.states, DESK.Sigma_x, DESK.C_F, combiner, quantizer)
        sim = simulate_transmission(strat, scen.states, DESK.Sigma_x, rng, n_symbols)
        A = sim["cov_r_analytic"]
        worst = max(worst, np.linalg.norm(sim["cov_r"] - A) / np.linalg.norm(A))
    cfg1 = DESK.replace(K=1)
    scen1 = draw_scenario(cfg1, np.random.default_rng(seed + 1))
    opt = design(scen1.states, cfg1.Sigma_x, cfg1.C_F, "mmse", "opt")
    naive = design(scen1.states, cfg1.Sigma_x, cfg1.C_F, "mmse", "naive")
    diff = max(abs(o.Omega[0, 0] - n.Omega[0, 0]) / abs(n.Omega[0, 0])
               for ro, rn in zip(opt.stripes, naive.stripes) for o, n in zip(ro, rn))
    ok = worst <= tol and diff <= 1e-10
    return CheckResult(9, "Monte-Carlo consistency", ok,
                       f"max relative Frobenius error {100 * worst:.2f}% at {n_symbols} symbols "
                       f"(tol {100 * tol:g}%); K=1 opt vs naive max relative diff {diff:.1e}",
                       time.time() - t0, {"mc_err": worst, "k1_diff": diff})


def check_protocol(seed=0):
    """Agent protocol reproduces the direct recursion; 2K^2 reals per link."""
    t0 = time.time()
    identical = True
    cfg = DESK
    scen = draw_scenario(cfg, np.random.default_rng(seed))
    traces = {}
    for scheme in ("mmse-opt", "mrc-opt", "mmse-naive", "mrc-naive"):
        combiner, quantizer = scheme.split("-")
        for hybrid in ("off", "random"):
            traces_s = []
            for m, row in enumerate(scen.states):
                direct, _ = run_stripe(row, cfg.Sigma_x, cfg.C_F, combiner, quantizer, hybrid,
                                       np.random.default_rng([seed, m]), stripe=m)
                agent, trace = run_protocol(row, cfg.Sigma_x, cfg.C_F, combiner, quantizer,
                                            hybrid, np.random.default_rng([seed, m]), stripe=m)
                traces_s.append(trace)
                for d, a in zip(direct, agent):
                    for name in ("U", "V", "Omega", "Sigma_n", "G_hat", "Sigma_e"):
                        x, y = getattr(d, name), getattr(a, name)
                        identical &= (x is None and y is None) or np.array_equal(x, y)
            if hybrid == "off":
                traces[scheme] = traces_s
    rows = {r["scheme"]: r for r in overhead_report(traces)}
    big = SystemConfig(M=1, L=2, N=24, K=20, C_F=100.0)
    scen20 = draw_scenario(big, np.random.default_rng(seed))
    _, trace20 = run_protocol(scen20.states[0], big.Sigma_x, big.C_F, "mmse", "opt")
    per_link_20 = {msg.payload_reals for msg in trace20.side_info_messages()}
    ok = (identical and per_link_20 == {800} and overhead_per_link("mmse", "opt", 20) == 800
          and rows["mmse-opt"]["per_link"] == 2 * cfg.K ** 2)
    return CheckResult(10, "protocol equivalence and overhead", ok,
                       f"bit-identical: {identical}; per-link side info at K=20: "
                       f"{sorted(per_link_20)} reals; desk-scale table: "
                       + ", ".join(f"{s} {r['per_link']}x{r['links']}" for s, r in rows.items()),
                       time.time() - t0)


CHECKS = {
    1: check_quantizer_oracle,
    2: check_constraint_active,
    3: check_kkt,
    4: check_ordering,
    5: check_crossover,
    6: check_gain,
    7: check_monotonic,
    8: check_hybrid,
    9: check_monte_carlo,
    10: check_protocol,
}


def run_checks(numbers=None, seed=0):
    """Run the selected criteria (all by default) and return their results."""
    numbers = sorted(CHECKS) if numbers is None else numbers
    return [CHECKS[n](seed=seed) for n in numbers]
