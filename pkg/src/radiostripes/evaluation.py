"""Rates, bounds and signal-level checks for designed INP strategies."""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .baselines import mrc_combiners, naive_fh
from .coordination import overhead_per_link
from .inp import design, live_basis
from .linalg import crandn, herm, hermitize, logdet2, sqrtm_psd
from .scenario import stacked_estimates

MAX_CUTSET_STRIPES = 12
SCHEMES = ("mmse-opt", "mrc-opt", "mmse-naive", "mrc-naive")


@dataclass
class RateReport:
    """Sum-rate lower bound, per-AP rates and the cutset bound (all in bits)."""

    scheme: str
    sum_rate_lb: float
    cutset: float
    per_ap_fh_rate: dict = field(default_factory=dict)
    per_ap_info: dict = field(default_factory=dict)
    overhead_total: int = 0
    hybrid: str = "off"

    @property
    def mean_fh_rate(self):
        return float(np.mean(list(self.per_ap_fh_rate.values())))


def _restrict(dead, K, *mats):
    Q = live_basis(dead, K)
    if Q is None:
        return mats
    return tuple(hermitize(herm(Q) @ A @ Q) for A in mats)


def fronthaul_rate(G_hat, Sigma_e, Sigma_x, Omega, dead=None):
    """Bits needed on the outgoing link: ``log2det(G Sx G^H + Sigma_e) - log2det(Omega)``.

    ``dead`` (directions of unbounded quantization noise) restricts both
    determinants to the complementary subspace, where ``Omega`` is finite.
    """
    total = hermitize(G_hat @ Sigma_x @ herm(G_hat) + Sigma_e)
    total, Omega = _restrict(dead, G_hat.shape[0], total, Omega)
    return logdet2(total) - logdet2(Omega)


def per_ap_info(G_hat, Sigma_n, Omega, Sigma_x, dead=None):
    """``log2det(I + (Sigma_n + Omega)^{-1} G Sx G^H)``; ``Omega = 0`` is allowed."""
    noise = hermitize(Sigma_n + Omega)
    signal = hermitize(G_hat @ Sigma_x @ herm(G_hat))
    noise, signal = _restrict(dead, G_hat.shape[0], noise, signal)
    return logdet2(noise + signal) - logdet2(noise)


def _cp_observation(side_infos):
    """Stacked live projections ``(P, G_cp, Sigma_cp)`` of the CP inputs."""
    Ps, Gs, Ss = [], [], []
    for si in side_infos:
        Q = si.live_basis()
        Q = np.eye(si.K) if Q is None else Q
        Ps.append(herm(Q))
        Gs.append(herm(Q) @ si.G_hat)
        Ss.append(hermitize(herm(Q) @ si.Sigma_e @ Q))
    return block_diag(*Ps), np.vstack(Gs), block_diag(*Ss)


def gaussian_mi(H, Sigma_noise, Sigma_x):
    """``log2det(I + Sigma_noise^{-1} H Sx H^H)`` evaluated in the K x K domain."""
    K = Sigma_x.shape[0]
    S = sqrtm_psd(Sigma_x)
    HS = H @ S
    X = np.linalg.solve(hermitize(Sigma_noise), HS)
    return logdet2(np.eye(K) + herm(HS) @ X)


def sum_rate_lb(side_infos, Sigma_x):
    """Sum-rate lower bound at the CP from the final side info of every stripe.

    Raises
    ------
    ValueError
        On an empty list or inconsistent dimensions.
    """
    if not side_infos:
        raise ValueError("need at least one stripe")
    K = Sigma_x.shape[0]
    for si in side_infos:
        if si.G_hat.shape != (K, K) or si.Sigma_e.shape != (K, K):
            raise ValueError("side info dimensions do not match Sigma_x")
    _, G_cp, S_cp = _cp_observation(side_infos)
    return gaussian_mi(G_cp, S_cp, Sigma_x)


def cutset_bound(states, Sigma_x, C_F):
    """Minimum over stripe subsets of ``C_F (M - |S|) + I(x; y_S)``.

    ``states[m][i]`` supplies the estimated channels and effective-noise
    covariances. Limited to ``MAX_CUTSET_STRIPES`` stripes.
    """
    M = len(states)
    if M > MAX_CUTSET_STRIPES:
        raise ValueError(f"cutset enumeration supports at most {MAX_CUTSET_STRIPES} stripes")
    H_bar, Sw_bar = stacked_estimates(states)
    best = C_F * M
    for size in range(1, M + 1):
        for subset in itertools.combinations(range(M), size):
            H = np.vstack([H_bar[m] for m in subset])
            S = block_diag(*[Sw_bar[m] for m in subset])
            best = min(best, C_F * (M - size) + gaussian_mi(H, S, Sigma_x))
    return best


def evaluate(states, Sigma_x, C_F, scheme="mmse-opt", hybrid="off", rng=None, strategy=None,
             cutset=None):
    """Design (unless ``strategy`` is given) and score one scheme on one scenario."""
    if strategy is None:
        combiner, quantizer = scheme.split("-")
        strategy = design(states, Sigma_x, C_F, combiner, quantizer, hybrid, rng)
    fh, info = {}, {}
    for m, row in enumerate(strategy.stripes):
        for i, res in enumerate(row):
            dead = res.side_info_out.dead
            fh[(m, i)] = fronthaul_rate(res.G_hat, res.Sigma_e, Sigma_x, res.Omega, dead)
            info[(m, i)] = per_ap_info(res.G_hat, res.Sigma_n, res.Omega, Sigma_x, dead)
    K = Sigma_x.shape[0]
    n_links = sum(len(row) for row in strategy.stripes)
    if cutset is None:
        cutset = cutset_bound(states, Sigma_x, C_F)
    return RateReport(
        scheme=strategy.scheme,
        sum_rate_lb=sum_rate_lb(strategy.final_side_infos, Sigma_x),
        cutset=cutset,
        per_ap_fh_rate=fh,
        per_ap_info=info,
        overhead_total=n_links * overhead_per_link(strategy.combiner, strategy.quantizer, K),
        hybrid=strategy.hybrid,
    )


def simulate_transmission(strategy, states, Sigma_x, rng, n_symbols=100_000):
    """Push random symbols through the designed chain and measure what the CP sees.

    Samples ``x``, the effective noise ``w`` at every AP and the quantization
    noise ``q ~ CN(0, Omega)``, then forms ``r_{m,i} = U^H y + V^H r_{m,i-1} + q``.
    Quantization noise along dead directions is unbounded and is not drawn;
    the CP only uses the projection of each stripe signal onto its live
    directions, which that noise never reaches.

    Returns
    -------
    dict
        ``cov_r`` (empirical covariance of the projected CP signal),
        ``cov_r_analytic``, ``mse`` (empirical per-symbol squared error of the
        CP's linear MMSE estimate of x) and ``mse_analytic``.
    """
    K = Sigma_x.shape[0]
    x = crandn(rng, K, n_symbols)
    x = sqrtm_psd(Sigma_x) @ x
    r_cp = []
    for row_states, row in zip(states, strategy.stripes):
        r = None
        for st, res in zip(row_states, row):
            N = st.Sigma_w.shape[0]
            w = sqrtm_psd(st.Sigma_w) @ crandn(rng, N, n_symbols)
            y = st.H_hat @ x + w
            r_new = herm(res.U) @ y
            if r is not None:
                r_new = r_new + herm(res.V) @ r
            q = sqrtm_psd(res.Omega) @ crandn(rng, K, n_symbols)
            r = r_new + q
        r_cp.append(r)
    P, G_cp, S_cp = _cp_observation(strategy.final_side_infos)
    r_cp = P @ np.vstack(r_cp)
    cov_analytic = hermitize(G_cp @ Sigma_x @ herm(G_cp) + S_cp)
    W = np.linalg.pinv(cov_analytic, hermitian=True) @ G_cp @ Sigma_x
    err = x - herm(W) @ r_cp
    mse_analytic = float(np.real(np.trace(Sigma_x - herm(W) @ G_cp @ Sigma_x)))
    return {
        "cov_r": r_cp @ herm(r_cp) / n_symbols,
        "cov_r_analytic": cov_analytic,
        "mse": float(np.mean(np.sum(np.abs(err) ** 2, axis=0))),
        "mse_analytic": mse_analytic,
    }


__all__ = [
    "RateReport",
    "SCHEMES",
    "cutset_bound",
    "evaluate",
    "fronthaul_rate",
    "gaussian_mi",
    "mrc_combiners",
    "naive_fh",
    "per_ap_info",
    "simulate_transmission",
    "sum_rate_lb",
]
