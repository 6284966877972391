"""Sequential in-network processing along a radio stripe.

Each AP linearly combines its own received signal with the signal arriving
from its predecessor, then compresses the K-dimensional result for the next
fronthaul hop. The design runs AP by AP; the only thing an AP needs from
upstream is the :class:`SideInfo` pair (effective channel, effective noise
covariance).
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .baselines import mrc_combiners, naive_fh
from .hybrid import HybridCombiner, hybrid_combiner
from .linalg import NumericalError, eigh_desc, herm, hermitize, inv_sqrtm_psd

log = logging.getLogger(__name__)

A_FLOOR = 1e-9
COMBINERS = ("mmse", "mrc")
QUANTIZERS = ("opt", "naive")


@dataclass(frozen=True)
class SideInfo:
    """Message from AP (m, i) to AP (m, i+1): ``(G_hat, Sigma_e)``.

    ``dead`` is an orthonormal K x d basis of directions along which the
    effective noise is unbounded (eigenmodes the quantizer gave zero rate).
    ``Sigma_e`` then holds only the finite part; only the projection of the
    signal onto the orthogonal complement carries information.
    """

    G_hat: np.ndarray
    Sigma_e: np.ndarray
    dead: np.ndarray = None

    @property
    def K(self):
        return self.G_hat.shape[0]

    @property
    def n_dead(self):
        return 0 if self.dead is None else self.dead.shape[1]

    def live_basis(self):
        """Orthonormal basis of the directions with finite noise."""
        return live_basis(self.dead, self.K)

    def reduced(self):
        """``(Q, Q^H G_hat, Q^H Sigma_e Q)`` with ``Q`` the live basis."""
        Q = self.live_basis()
        if Q is None:
            return None, self.G_hat, self.Sigma_e
        return Q, herm(Q) @ self.G_hat, hermitize(herm(Q) @ self.Sigma_e @ Q)

    @property
    def overhead_reals(self):
        # Sigma_e is Hermitian and G_hat is K x K complex; the count used
        # for signaling is 2K^2 real values per link.
        return 2 * self.K**2


@dataclass
class ApInpResult:
    """Designed INP strategy of one AP plus the intermediate quantities."""

    U: np.ndarray
    V: np.ndarray
    Omega: np.ndarray
    Sigma_n: np.ndarray
    side_info_out: SideInfo
    gamma_eig: np.ndarray = None
    a: np.ndarray = None
    lam: float = None
    hybrid: HybridCombiner = None
    index: tuple = None

    @property
    def G_hat(self):
        return self.side_info_out.G_hat

    @property
    def Sigma_e(self):
        return self.side_info_out.Sigma_e


@dataclass
class InpStrategy:
    """Strategies of every AP, ``stripes[m][i]``."""

    stripes: list
    combiner: str = "mmse"
    quantizer: str = "opt"
    hybrid: str = "off"
    extras: dict = field(default_factory=dict)

    @property
    def final_side_infos(self):
        return [row[-1].side_info_out for row in self.stripes]

    @property
    def scheme(self):
        return f"{self.combiner}-{self.quantizer}"


def live_basis(dead, K):
    """Orthonormal complement of ``dead`` in C^K (``None`` when nothing is dead)."""
    if dead is None or dead.shape[1] == 0:
        return None
    Qfull, _ = np.linalg.qr(np.hstack([dead, np.eye(K, dtype=complex)]))
    return Qfull[:, dead.shape[1]:K]


def _orth(X, scale=None, rtol=1e-10):
    """Orthonormal basis of range(X); singular values below ``rtol * scale`` are dropped."""
    if X is None or X.shape[1] == 0:
        return None
    Uo, sv, _ = np.linalg.svd(X, full_matrices=False)
    if scale is None:
        scale = sv.max(initial=0.0)
    keep = sv > rtol * max(scale, np.finfo(float).tiny)
    return Uo[:, keep] if np.any(keep) else None


# ---------------------------------------------------------------------------
# Linear combining
# ---------------------------------------------------------------------------

def mmse_combiners(H_hat, Sigma_w, prev, Sigma_x):
    """Linear MMSE estimate of x from the stacked AP input ``[y; r_prev]``.

    Returns ``(U, V)``: the first N and last K rows of
    ``A = (B Sigma_x B^H + Sigma_w~)^{-1} B Sigma_x``. ``V`` is ``None``
    when ``prev`` is ``None`` (head of the stripe).
    """
    N = H_hat.shape[0]
    if prev is None:
        B, S = H_hat, Sigma_w
    else:
        Q, G_prev, S_prev = prev.reduced()
        B = np.vstack([H_hat, G_prev])
        S = block_diag(Sigma_w, S_prev)
    C = hermitize(B @ Sigma_x @ herm(B) + S)
    try:
        A = np.linalg.solve(C, B @ Sigma_x)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular combiner system") from exc
    if prev is None:
        return A, None
    V = A[N:] if Q is None else Q @ A[N:]
    return A[:N], V


def conditional_v(U, H_hat, prev, Sigma_x):
    """MMSE choice of ``V`` once ``U`` is fixed (used after hybrid factoring).

    Minimizes ``E||x - U^H y - V^H r_prev||^2`` over ``V`` alone.
    """
    if prev is None:
        return None
    Q, G, S = prev.reduced()
    C = hermitize(G @ Sigma_x @ herm(G) + S)
    K = Sigma_x.shape[0]
    target = G @ Sigma_x @ (np.eye(K) - herm(H_hat) @ U)
    V = np.linalg.solve(C, target)
    return V if Q is None else Q @ V


def combiner_mse(U, V, H_hat, Sigma_w, prev, Sigma_x):
    """Trace MSE of estimating x by ``U^H y + V^H r_prev``."""
    if prev is None:
        A, B, S = U, H_hat, Sigma_w
    else:
        if prev.n_dead:
            raise ValueError("MSE is unbounded when the incoming signal has dead directions")
        A = np.vstack([U, V])
        B = np.vstack([H_hat, prev.G_hat])
        S = block_diag(Sigma_w, prev.Sigma_e)
    E = Sigma_x - herm(A) @ B @ Sigma_x - Sigma_x @ herm(B) @ A
    E = E + herm(A) @ (B @ Sigma_x @ herm(B) + S) @ A
    return float(np.real(np.trace(E)))


def update_effective_channel(U, V, H_hat, prev):
    """``G_i = U^H H_hat + V^H G_{i-1}`` (just ``U^H H_hat`` at the head)."""
    G = herm(U) @ H_hat
    if prev is not None:
        G = G + herm(V) @ prev.G_hat
    return G


def update_noise_cov(U, V, Sigma_w, prev, index=None):
    """Pre-quantization noise ``Sigma_n = U^H Sigma_w U + V^H Sigma_e,prev V``.

    When the incoming signal has dead directions, ``Sigma_e,prev`` is its
    finite part and :func:`propagate_dead` gives the dead directions of the
    result; positive definiteness is then checked on the live part only.

    Raises
    ------
    NumericalError
        If the result is not positive definite (rank-deficient combiners).
    """
    Sn = herm(U) @ Sigma_w @ U
    if prev is not None:
        Sn = Sn + herm(V) @ prev.Sigma_e @ V
    Sn = hermitize(Sn)
    Q = live_basis(propagate_dead(V, prev), Sn.shape[0])
    try:
        np.linalg.cholesky(Sn if Q is None else herm(Q) @ Sn @ Q)
    except np.linalg.LinAlgError as exc:
        where = f" at AP {index}" if index is not None else ""
        raise NumericalError(f"noise covariance is singular{where}") from exc
    return Sn


def propagate_dead(V, prev):
    """Dead directions of ``V^H r_prev``: the span of ``V^H D_prev``."""
    if prev is None or not prev.n_dead:
        return None
    return _orth(herm(V) @ prev.dead, scale=np.linalg.norm(V, 2))


# ---------------------------------------------------------------------------
# Quantizer design
# ---------------------------------------------------------------------------

def quantizer_eigenvalues(G_hat, Sigma_n, Sigma_x):
    """Whiten by ``Sigma_n^{-1/2}`` and diagonalize the whitened signal covariance.

    Returns
    -------
    gamma : ndarray, (K,)
        Eigenvalues, descending, clamped at zero.
    U_eig : ndarray, (K, K)
        Unitary eigenvectors.
    N_white : ndarray, (K, K)
        The Hermitian whitener ``Sigma_n^{-1/2}``.
    """
    try:
        N_white = inv_sqrtm_psd(Sigma_n)
    except NumericalError as exc:
        raise ValueError("Sigma_n must be positive definite") from exc
    W = N_white @ G_hat @ Sigma_x @ herm(G_hat) @ herm(N_white)
    gamma, U_eig = eigh_desc(W)
    scale = max(float(np.real(np.trace(W))), 1.0)
    if gamma.size and gamma[-1] < -1e-10 * scale:
        raise NumericalError(f"whitened signal covariance has eigenvalue {gamma[-1]:.3e}")
    return np.clip(gamma, 0.0, None), U_eig, N_white


def _allocation(lam, c, a_floor):
    a = np.maximum(c / lam - 1.0, 0.0)
    if a_floor:
        a = np.maximum(a, a_floor)
    return a


def constraint_bits(a, gamma):
    """Fronthaul rate of an eigen-domain allocation, ``sum log2(1 + a (gamma + 1))``."""
    return float(np.sum(np.log1p(a * (gamma + 1.0)))) / np.log(2.0)


def objective_bits(a, gamma):
    """Information rate ``sum log2(1 + a (gamma+1)) - log2(1 + a)``."""
    return float(np.sum(np.log1p(a * (gamma + 1.0)) - np.log1p(a))) / np.log(2.0)


def solve_quantizer(gamma, C_F, a_floor=0.0, tol=1e-9, max_iter=200):
    """Per-eigenmode compression levels under a total fronthaul budget.

    ``a_k = [ (1 - 1/(gamma_k + 1)) / lam - 1 ]^+`` with the multiplier
    ``lam`` found by bisection (on ``log lam``) so that the fronthaul rate
    equals ``C_F`` bits, then refined in closed form on the active set.

    Parameters
    ----------
    gamma : array_like
        Nonnegative eigenvalues of the whitened signal covariance.
    C_F : float
        Fronthaul budget in bits per channel use.
    a_floor : float
        If positive, every ``a_k`` is floored at this value *inside* the
        bisection, so the budget is met exactly with all modes active.

    Returns
    -------
    a : ndarray
    lam : float
        The multiplier; ``0.0`` when all ``gamma`` vanish and the budget is
        simply split evenly.
    """
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0):
        raise ValueError("gamma must be nonnegative")
    if not C_F > 0:
        raise ValueError("C_F must be positive")
    K = gamma.size
    if not np.any(gamma > 0):
        return np.full(K, np.expm1(np.log(2.0) * C_F / K)), 0.0

    c = gamma / (gamma + 1.0)

    def excess(log_lam):
        return constraint_bits(_allocation(np.exp(log_lam), c, a_floor), gamma) - C_F

    lo, hi = np.log(1e-12), 0.0
    while excess(lo) < 0:
        lo -= np.log(1e12)
        if lo < -700:
            raise NumericalError("fronthaul budget too large to bracket the multiplier")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        e = excess(mid)
        if abs(e) < tol:
            break
        if e > 0:
            lo = mid
        else:
            hi = mid
    else:
        raise NumericalError("bisection on the fronthaul multiplier did not converge")
    lam = float(np.exp(mid))
    if not a_floor:
        lam = _polish(lam, gamma, c, C_F)
    return _allocation(lam, c, a_floor), lam


def _polish(lam, gamma, c, C_F):
    """Exact multiplier for the active set found by bisection.

    On the active set ``1 + a_k (gamma_k + 1) = gamma_k (1 - lam) / lam``, so
    the budget fixes ``(1 - lam) / lam`` in closed form. The bisection value
    is kept if the closed form would change the active set.
    """
    active = c > lam
    n = int(active.sum())
    if n == 0:
        return lam
    t = np.exp((C_F * np.log(2.0) - np.sum(np.log(gamma[active]))) / n)
    exact = 1.0 / (1.0 + t)
    if np.all(c[active] > exact) and np.all(c[~active] <= exact):
        return float(exact)
    return lam


def recover_omega(a, U_eig, N_white):
    """Map eigen-domain levels back: ``Omega = N^{-1} U diag(1/a) U^H N^{-H}``.

    Zero levels are floored at ``A_FLOOR`` with a warning.
    """
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        log.warning("flooring %d zero compression level(s) at %g", int(np.sum(a <= 0)), A_FLOOR)
        a = np.maximum(a, A_FLOOR)
    N_inv = np.linalg.inv(N_white)
    T = N_inv @ U_eig
    return hermitize((T / a) @ herm(T))


def design_quantizer(G_hat, Sigma_n, Sigma_x, C_F, dead_in=None):
    """Optimized quantization noise for one AP, restricted to its live directions.

    Modes with a zero compression level get unbounded noise: they are left
    out of ``Omega`` (the finite part) and returned as dead directions.

    Returns
    -------
    Omega, dead, gamma, a, lam
    """
    K = G_hat.shape[0]
    Q = live_basis(dead_in, K)
    if Q is None:
        G_r, S_r = G_hat, Sigma_n
    else:
        G_r, S_r = herm(Q) @ G_hat, hermitize(herm(Q) @ Sigma_n @ Q)
    gamma, U_eig, N_white = quantizer_eigenvalues(G_r, S_r, Sigma_x)
    a, lam = solve_quantizer(gamma, C_F)
    T = np.linalg.solve(N_white, U_eig)
    if Q is not None:
        T = Q @ T
    live = a > 0
    Tl = T[:, live]
    Omega = hermitize((Tl / a[live]) @ herm(Tl))
    new_dead = T[:, ~live] / np.linalg.norm(T[:, ~live], axis=0)
    parts = [d for d in (dead_in, new_dead) if d is not None and d.shape[1]]
    dead = _orth(np.hstack(parts)) if parts else None
    return Omega, dead, gamma, a, lam


def kkt_stationarity(a, gamma, lam):
    """Stationarity residual of each eigenmode (zero for active modes at optimum)."""
    a = np.asarray(a, dtype=float)
    g = np.asarray(gamma, dtype=float)
    return (1 - lam) * (g + 1) / (1 + a * (g + 1)) - 1 / (1 + a)


# ---------------------------------------------------------------------------
# Per-AP step and stripe recursion
# ---------------------------------------------------------------------------

def ap_step(H_hat, Sigma_w, prev, Sigma_x, C_F, combiner="mmse", quantizer="opt",
            hybrid="off", rng=None, index=None):
    """Design the INP strategy of one AP given its predecessor's side info."""
    if combiner == "mmse":
        U, V = mmse_combiners(H_hat, Sigma_w, prev, Sigma_x)
    elif combiner == "mrc":
        U, V = mrc_combiners(H_hat, first=prev is None)
    else:
        raise ValueError(f"unknown combiner {combiner!r}")

    hyb = None
    if hybrid != "off":
        hyb = hybrid_combiner(U, hybrid, rng)
        U = hyb.U_hyb
        if combiner == "mmse":
            V = conditional_v(U, H_hat, prev, Sigma_x)

    G = update_effective_channel(U, V, H_hat, prev)
    Sigma_n = update_noise_cov(U, V, Sigma_w, prev, index)
    dead_in = propagate_dead(V, prev)

    gamma = a = lam = None
    if quantizer == "opt":
        Omega, dead, gamma, a, lam = design_quantizer(G, Sigma_n, Sigma_x, C_F, dead_in)
    elif quantizer == "naive":
        if dead_in is not None:
            raise ValueError("per-element quantization of a signal with dead directions")
        Omega, dead = naive_fh(G, Sigma_n, Sigma_x, C_F), None
    else:
        raise ValueError(f"unknown quantizer {quantizer!r}")

    out = SideInfo(G_hat=G, Sigma_e=hermitize(Sigma_n + Omega), dead=dead)
    return ApInpResult(U=U, V=V, Omega=Omega, Sigma_n=Sigma_n, side_info_out=out,
                       gamma_eig=gamma, a=a, lam=lam, hybrid=hyb, index=index)


def run_stripe(ap_states, Sigma_x, C_F, combiner="mmse", quantizer="opt", hybrid="off",
               rng=None, stripe=0):
    """Run the per-AP design from the head of the stripe to its last AP.

    Returns
    -------
    results : list of ApInpResult
    final : SideInfo
        What the CP receives from this stripe.
    """
    prev = None
    results = []
    for i, st in enumerate(ap_states):
        try:
            res = ap_step(st.H_hat, st.Sigma_w, prev, Sigma_x, C_F, combiner, quantizer,
                          hybrid, rng, index=(stripe, i))
        except (NumericalError, ValueError) as exc:
            raise type(exc)(f"AP ({stripe}, {i}): {exc}") from exc
        results.append(res)
        prev = res.side_info_out
    return results, prev


def design(states, Sigma_x, C_F, combiner="mmse", quantizer="opt", hybrid="off", rng=None):
    """Run every stripe and collect an :class:`InpStrategy`."""
    stripes = [
        run_stripe(row, Sigma_x, C_F, combiner, quantizer, hybrid, rng, stripe=m)[0]
        for m, row in enumerate(states)
    ]
    return InpStrategy(stripes=stripes, combiner=combiner, quantizer=quantizer, hybrid=hybrid)
